from __future__ import annotations

import uuid
from pathlib import Path

from django.db import models
from simple_history.models import HistoricalRecords


class ExperimentRun(models.Model):
    class Status(models.TextChoices):
        PENDING = "PENDING"
        RUNNING = "RUNNING"
        COMPLETED = "COMPLETED"
        FAILED = "FAILED"

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    name = models.CharField(max_length=100, blank=True, default="")
    command = models.CharField(max_length=50, default="pipeline")
    status = models.CharField(max_length=20, choices=Status.choices, default=Status.PENDING)
    stage = models.CharField(max_length=50, blank=True, default="")

    config = models.JSONField(default=dict, blank=True)
    config_hash = models.CharField(max_length=64, blank=True, db_index=True)
    # u64 seeds do not fit a signed 64-bit column
    seed = models.CharField(max_length=20, blank=True)
    error = models.JSONField(default=dict, blank=True)
    artifact_dir = models.CharField(max_length=500, blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    # Audit history tracking
    history = HistoricalRecords()

    class Meta:
        ordering = ("-created_at",)

    @property
    def artifacts(self) -> Path:
        return Path(self.artifact_dir)

    def __str__(self) -> str:
        return f"{self.id} ({self.command}, {self.status})"
