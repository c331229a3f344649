from __future__ import annotations

from experiments.config import INNOVATIONS
from experiments.management.base import ExperimentCommand
from experiments.services import DIAGNOSTICS, KERNEL, solve_stage, stage, tracked_run
from pointprocess.errors import ConfigError
from pointprocess.formats import read_json


class Command(ExperimentCommand):
    help = "Solve the discretised Wiener-Hopf equation for the kernel"

    def run(self, **options):
        config, out = self.load(options)
        if config.solver == INNOVATIONS:
            raise ConfigError("use the innovations command for the innovations solver", stage="validate")
        with tracked_run("solve", config, out) as run:
            with stage("solve", run):
                solve_stage(config, out)
        report = read_json(out / DIAGNOSTICS)
        if options["format"] == "json":
            self.emit({"kernel": str(out / KERNEL), "residual": report["residual"], "solver": config.solver})
        self.stdout.write(self.style.SUCCESS(f"{config.solver}: wrote {out / KERNEL}"))
