from __future__ import annotations

from experiments.management.base import ExperimentCommand
from experiments.services import MANIFEST, run_pipeline


class Command(ExperimentCommand):
    help = "Run simulate, estimate, solve, assemble and evaluate in one go"

    def run(self, **options):
        config, out = self.load(options)
        out = run_pipeline(config, out)
        if options["format"] == "json":
            self.emit({"out": str(out), "config_hash": config.config_hash()})
        self.stdout.write(self.style.SUCCESS(f"Pipeline complete: {out / MANIFEST}"))
