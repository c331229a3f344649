from __future__ import annotations

from experiments.management.base import ExperimentCommand
from experiments.services import STREAMS, simulate_stage, stage, tracked_run


class Command(ExperimentCommand):
    help = "Simulate the training streams of an experiment config"

    def run(self, **options):
        config, out = self.load(options)
        with tracked_run("simulate", config, out) as run:
            with stage("simulate", run):
                streams = simulate_stage(config, out)
        events = sum(s.times.size for s in streams)
        self.stdout.write(
            self.style.SUCCESS(f"Wrote {len(streams)} streams ({events} events) to {out / STREAMS}")
        )
