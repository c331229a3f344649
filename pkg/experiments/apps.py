from django.apps import AppConfig


class ExperimentsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "experiments"

    def ready(self) -> None:
        # Import the plug-in packages so their registries are populated.
        import simulators  # noqa: F401
        import solvers  # noqa: F401
