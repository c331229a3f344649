from django.contrib import admin
from simple_history.admin import SimpleHistoryAdmin

from experiments.models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(SimpleHistoryAdmin):
    list_display = ("id", "name", "command", "status", "stage", "config_hash", "created_at")
    list_filter = ("status", "command", "created_at")
    search_fields = ("id", "name", "config_hash")
    readonly_fields = ("id", "config_hash", "created_at", "started_at", "completed_at")
