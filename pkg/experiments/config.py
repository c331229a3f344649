"""
Experiment configuration documents.

A config is a JSON object with ``"schema_version": 1``::

    {
      "schema_version": 1,
      "name": "hawkes-exp",
      "model": {"type": "hawkes", "baseline": [0.5],
                "kernel": {"type": "exponential", "alpha": 0.8, "beta": 1.0}},
      "horizon": 2000.0,
      "replications": 20,
      "seed": 12345,
      "grid": {"delta": 0.05, "p": 200},
      "solver": "whittle",
      "ridge": false,
      "bootstrap_resamples": 200,
      "evaluation": {"delta": 0.5, "streams": 5, "burn_in": 40.0}
    }

``solver`` is one of the registered Wiener-Hopf solvers or ``innovations``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from django import forms
from django.core.exceptions import ValidationError

from pointprocess import LagGrid
from pointprocess.conf import get_setting
from pointprocess.errors import ConfigError, PointProcessError
from pointprocess.formats import canonical_json, read_json
from simulators import get_simulator, split_model_spec
from simulators.rng import SEED_LIMIT, replicate_seed
from solvers import all_solvers

SCHEMA_VERSION = 1
INNOVATIONS = "innovations"

_KNOWN_KEYS = {
    "schema_version",
    "name",
    "model",
    "horizon",
    "replications",
    "seed",
    "grid",
    "solver",
    "ridge",
    "bootstrap_resamples",
    "evaluation",
}


def solver_choices() -> list[tuple[str, str]]:
    choices = [(s.key, s.name) for s in all_solvers()]
    choices.append((INNOVATIONS, "Innovations algorithm (moving-average form)"))
    return choices


@dataclass(frozen=True)
class EvaluationSpec:
    delta: float = 0.5
    streams: int = 5
    burn_in: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict[str, Any]
    horizon: float
    replications: int
    seed: int
    grid: LagGrid
    solver: str = "whittle"
    name: str = ""
    ridge: bool = False
    bootstrap_resamples: int | None = None
    evaluation: EvaluationSpec = field(default_factory=EvaluationSpec)
    schema_version: int = SCHEMA_VERSION

    @property
    def model_type(self) -> str:
        return str(self.model["type"])

    @property
    def resamples(self) -> int:
        if self.bootstrap_resamples is not None:
            return self.bootstrap_resamples
        return int(get_setting("BLP_BOOTSTRAP_RESAMPLES"))

    @property
    def evaluation_seed(self) -> int:
        """Seed of the evaluation battery; it follows the training replicates."""
        return replicate_seed(self.seed, self.replications)

    def with_seed(self, seed: int | None) -> ExperimentConfig:
        if seed is None:
            return self
        return parse_config({**self.to_dict(), "seed": seed})

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": self.schema_version,
            "name": self.name,
            "model": self.model,
            "horizon": self.horizon,
            "replications": self.replications,
            "seed": self.seed,
            "grid": {"delta": self.grid.step, "p": self.grid.length},
            "solver": self.solver,
            "ridge": self.ridge,
            "evaluation": {
                "delta": self.evaluation.delta,
                "streams": self.evaluation.streams,
                "burn_in": self.evaluation.burn_in,
            },
        }
        if self.bootstrap_resamples is not None:
            out["bootstrap_resamples"] = self.bootstrap_resamples
        return out

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()


class ExperimentConfigForm(forms.Form):
    schema_version = forms.IntegerField(min_value=SCHEMA_VERSION, max_value=SCHEMA_VERSION)
    name = forms.CharField(required=False, max_length=100)
    model = forms.JSONField()
    horizon = forms.FloatField(min_value=0.0)
    replications = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(min_value=0, max_value=SEED_LIMIT - 1)
    grid = forms.JSONField()
    solver = forms.ChoiceField(required=False, choices=solver_choices)
    ridge = forms.BooleanField(required=False)
    bootstrap_resamples = forms.IntegerField(required=False, min_value=2)
    evaluation = forms.JSONField(required=False)

    def clean_model(self):
        model = self.cleaned_data["model"]
        if not isinstance(model, dict) or "type" not in model:
            raise ValidationError("model must be an object with a 'type' field")
        try:
            get_simulator(model["type"])
        except PointProcessError as e:
            raise ValidationError(e.message, code=e.code) from e
        return model

    def clean_grid(self):
        grid = self.cleaned_data["grid"]
        if not isinstance(grid, dict):
            raise ValidationError("grid must be an object with 'delta' and 'p'")
        try:
            return LagGrid(float(grid["delta"]), int(grid["p"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"grid needs numeric 'delta' and integer 'p': {e}") from e
        except PointProcessError as e:
            raise ValidationError(e.message, code=e.code) from e

    def clean_evaluation(self):
        spec = self.cleaned_data.get("evaluation") or {}
        if not isinstance(spec, dict):
            raise ValidationError("evaluation must be an object")
        unknown = set(spec) - {"delta", "streams", "burn_in"}
        if unknown:
            raise ValidationError(f"unknown evaluation keys: {sorted(unknown)}")
        try:
            evaluation = EvaluationSpec(
                delta=float(spec.get("delta", EvaluationSpec.delta)),
                streams=int(spec.get("streams", EvaluationSpec.streams)),
                burn_in=float(spec.get("burn_in", EvaluationSpec.burn_in)),
            )
        except (TypeError, ValueError) as e:
            raise ValidationError(f"bad evaluation settings: {e}") from e
        if not (evaluation.delta > 0 and evaluation.streams >= 2 and evaluation.burn_in >= 0):
            raise ValidationError("evaluation needs delta > 0, streams >= 2 and burn_in >= 0")
        return evaluation

    def clean(self):
        cleaned = super().clean()
        grid = cleaned.get("grid")
        horizon = cleaned.get("horizon")
        if horizon is not None and not horizon > 0:
            self.add_error("horizon", "horizon must be positive")
            horizon = None
        if grid is not None and horizon is not None and not grid.span < horizon / 2:
            self.add_error("grid", "p * delta must be less than half the horizon")
        evaluation = cleaned.get("evaluation")
        if evaluation is not None and horizon is not None:
            if evaluation.burn_in + evaluation.delta > horizon:
                self.add_error("evaluation", "burn_in leaves no evaluation bin in the horizon")
        return cleaned


def _form_message(form: forms.Form) -> str:
    parts = []
    for name, errors in form.errors.items():
        label = "config" if name == "__all__" else name
        parts.append(f"{label}: {' '.join(errors)}")
    return "; ".join(parts)


def parse_config(data: Any) -> ExperimentConfig:
    """
    Validate a config document.

    Model parameters are checked last, by the model's own simulator, so
    their errors keep their type (an unstable Hawkes kernel raises
    UnstableKernel).

    Raises:
        ConfigError: unknown keys or any field failing validation; the form's
            field errors are attached under ``fields``
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}", keys=sorted(unknown))
    form = ExperimentConfigForm(data=data)
    if not form.is_valid():
        raise ConfigError(_form_message(form), fields=form.errors.get_json_data())
    c = form.cleaned_data
    split_model_spec(c["model"])
    return ExperimentConfig(
        schema_version=c["schema_version"],
        name=c.get("name") or "",
        model=c["model"],
        horizon=float(c["horizon"]),
        replications=int(c["replications"]),
        seed=int(c["seed"]),
        grid=c["grid"],
        solver=c.get("solver") or "whittle",
        ridge=bool(c.get("ridge")),
        bootstrap_resamples=c.get("bootstrap_resamples"),
        evaluation=c["evaluation"],
    )


def load_config(path: Path) -> ExperimentConfig:
    return parse_config(read_json(path))


__all__ = [
    "EvaluationSpec",
    "ExperimentConfig",
    "ExperimentConfigForm",
    "load_config",
    "parse_config",
]
