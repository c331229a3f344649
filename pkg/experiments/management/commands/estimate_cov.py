from __future__ import annotations

from experiments.management.base import ExperimentCommand
from experiments.services import COVARIANCE, estimate_stage, stage, tracked_run


class Command(ExperimentCommand):
    help = "Estimate the covariance density from simulated streams"

    def run(self, **options):
        config, out = self.load(options)
        with tracked_run("estimate_cov", config, out) as run:
            with stage("estimate", run):
                cov = estimate_stage(config, out)
        if options["format"] == "json":
            self.emit({"covariance": str(out / COVARIANCE), "mean_rates": cov.mean_rates.tolist()})
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / COVARIANCE}"))
