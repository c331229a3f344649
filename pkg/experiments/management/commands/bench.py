from __future__ import annotations

from experiments.bench import run_bench
from experiments.management.base import ExperimentCommand
from pointprocess.formats import write_json


class Command(ExperimentCommand):
    help = "Time the Wiener-Hopf solvers over a range of grid sizes"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024, 2048, 4096])
        parser.add_argument("--d", type=int, default=2, help="Process dimension")
        parser.add_argument("--solvers", nargs="+", default=["direct", "whittle"])
        parser.add_argument("--repeats", type=int, default=None, help="Timed runs per size")

    def run(self, **options):
        report = run_bench(
            options["sizes"],
            d=options["d"],
            solvers=options["solvers"],
            seed=options["seed"] or 0,
            repeats=options["repeats"],
        )
        if options["out"] is not None:
            write_json(report.to_dict(), options["out"] / "bench.json")
        if options["format"] == "json":
            self.emit(report.to_dict())
        else:
            self.stdout.write("solver,p,seconds")
            for key, times in report.seconds.items():
                for p, seconds in zip(report.sizes, times):
                    self.stdout.write(f"{key},{p},{seconds!r}")
        for key, fit in report.slopes.items():
            self.stdout.write(
                f"{key}: slope {fit.slope:.3f} (95% CI {fit.ci_low:.3f} .. {fit.ci_high:.3f})"
            )
        self.stdout.write(
            self.style.SUCCESS(f"Solvers agree to {report.max_disagreement:.3g}")
        )
