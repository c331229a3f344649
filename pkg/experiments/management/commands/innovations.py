from __future__ import annotations

from experiments.config import INNOVATIONS
from experiments.management.base import ExperimentCommand
from experiments.services import SHOT_KERNEL, solve_stage, stage, tracked_run
from pointprocess.formats import read_json


class Command(ExperimentCommand):
    help = "Run the innovations algorithm and recover the moving-average kernel"

    def run(self, **options):
        config, out = self.load(options)
        config = self.with_solver(config, INNOVATIONS)
        with tracked_run("innovations", config, out) as run:
            with stage("innovations", run):
                solve_stage(config, out)
        shot = read_json(out / SHOT_KERNEL)
        if options["format"] == "json":
            self.emit({"shot_kernel": str(out / SHOT_KERNEL), "leakage": shot["leakage"], "flagged": shot["flagged"]})
        if shot["flagged"]:
            self.stdout.write(
                self.style.WARNING(f"Kernel mass beyond the shot support: leakage {shot['leakage']:.3g}")
            )
        self.stdout.write(self.style.SUCCESS(f"Wrote {out / SHOT_KERNEL}"))
