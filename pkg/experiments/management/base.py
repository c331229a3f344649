from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

from django.core.management.base import BaseCommand, CommandError

from experiments.config import ExperimentConfig, load_config, parse_config, solver_choices
from experiments.services import default_run_dir, stage
from pointprocess.errors import ConfigError, PointProcessError
from pointprocess.formats import canonical_json
from simulators.rng import SEED_LIMIT


def seed_arg(raw: str) -> int:
    seed = int(raw)
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be in [0, 2**64): {raw}")
    return seed


class ExperimentCommand(BaseCommand):
    """
    Shared flags and error handling for the experiment commands.

    A PointProcessError is written to stderr as one JSON line and the command
    exits with the error's exit code (2 config, 3 numeric, 4 I/O).
    """

    def add_arguments(self, parser):
        parser.add_argument("--config", type=Path, help="Experiment config (JSON)")
        parser.add_argument("--seed", type=seed_arg, default=None, help="Override the config seed")
        parser.add_argument("--out", type=Path, default=None, help="Run directory")
        parser.add_argument(
            "--solver",
            default=None,
            choices=[key for key, _ in solver_choices()],
            help="Override the config solver",
        )
        parser.add_argument("--format", choices=["json", "csv"], default="json")

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except PointProcessError as e:
            self.stderr.write(canonical_json(e.to_dict()), style_func=lambda s: s)
            raise CommandError(e.message, returncode=e.exit_code) from e

    def run(self, **options: Any) -> None:
        raise NotImplementedError

    def load(self, options: dict[str, Any]) -> tuple[ExperimentConfig, Path]:
        with stage("validate"):
            if options.get("config") is None:
                raise ConfigError("--config is required")
            config = load_config(options["config"]).with_seed(options.get("seed"))
            if options.get("solver"):
                config = parse_config({**config.to_dict(), "solver": options["solver"]})
        out = options.get("out") or default_run_dir(config)
        return config, Path(out)

    def with_solver(self, config: ExperimentConfig, solver: str) -> ExperimentConfig:
        return dataclasses.replace(config, solver=solver)

    def emit(self, doc: dict[str, Any]) -> None:
        self.stdout.write(canonical_json(doc))
