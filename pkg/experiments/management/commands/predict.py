from __future__ import annotations

from experiments.management.base import ExperimentCommand
from experiments.services import (
    COVARIANCE,
    SCORE,
    TRACE,
    assemble_stage,
    evaluate_stage,
    load_solution,
    stage,
    tracked_run,
)
from pointprocess.formats import read_covariance_grid


class Command(ExperimentCommand):
    help = "Assemble the predictor from a solved run and score it on fresh streams"

    def run(self, **options):
        config, out = self.load(options)
        with tracked_run("predict", config, out) as run:
            with stage("assemble", run):
                cov = read_covariance_grid(out / COVARIANCE)
                pred = assemble_stage(out, load_solution(config, out), cov)
            with stage("evaluate", run):
                report = evaluate_stage(config, out, pred, write_trace=options["format"] == "csv")
        if options["format"] == "json":
            self.emit(report.to_dict())
        else:
            self.stdout.write(f"Trace: {out / TRACE}")
        self.stdout.write(self.style.SUCCESS(f"{pred.form} predictor scored: {out / SCORE}"))
