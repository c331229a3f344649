from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from pointprocess import EventStream
from pointprocess.errors import ConfigError, InvalidParameter, NegativeRate

from simulators import Simulator, register
from simulators.rng import make_rng

logger = logging.getLogger(__name__)


def as_rates(rates: Any, name: str = "rates") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(rates, dtype=float))
    if arr.ndim != 1:
        raise InvalidParameter(f"{name} must be a vector", shape=list(arr.shape))
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise NegativeRate(f"{name} must be non-negative", **{name: arr})
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} must be finite", **{name: arr})
    return arr


def check_horizon(horizon: float) -> float:
    horizon = float(horizon)
    if not (np.isfinite(horizon) and horizon > 0):
        raise InvalidParameter("horizon must be positive and finite", horizon=horizon)
    return horizon


def poisson_events(
    rng: np.random.Generator, rates: np.ndarray, start: float, end: float
) -> tuple[np.ndarray, np.ndarray]:
    """Homogeneous Poisson events on [start, end), sorted, one draw per mark in order."""
    times: list[np.ndarray] = []
    marks: list[np.ndarray] = []
    for j, rate in enumerate(rates):
        n = rng.poisson(rate * (end - start))
        t = start + (end - start) * rng.random(n)
        times.append(t)
        marks.append(np.full(n, j, dtype=np.int64))
    all_times = np.concatenate(times) if times else np.empty(0)
    all_marks = np.concatenate(marks) if marks else np.empty(0, dtype=np.int64)
    order = np.argsort(all_times, kind="stable")
    all_times, all_marks = all_times[order], all_marks[order]
    # Coincident draws have probability zero, but the stream must stay simple.
    keep = np.ones(all_times.size, dtype=bool)
    keep[1:] = np.diff(all_times) > 0
    return all_times[keep], all_marks[keep]


def simulate_poisson(rates: Any, horizon: float, seed: int) -> EventStream:
    rates = as_rates(rates)
    horizon = check_horizon(horizon)
    rng = make_rng(seed)
    times, marks = poisson_events(rng, rates, 0.0, horizon)
    logger.debug("poisson: %d events on [0, %g)", times.size, horizon)
    return EventStream(times=times, marks=marks, horizon=horizon, dim=rates.size)


@dataclass(frozen=True, eq=False)
class PoissonParams:
    rates: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "rates", as_rates(self.rates))

    @property
    def dim(self) -> int:
        return int(self.rates.size)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "poisson", "rates": self.rates.tolist()}


@register
class PoissonSimulator(Simulator):
    key = "poisson"
    name = "Homogeneous Poisson"

    def parse_params(self, spec: dict[str, Any]) -> PoissonParams:
        if "rates" not in spec:
            raise ConfigError("poisson model needs 'rates'")
        return PoissonParams(spec["rates"])

    def simulate(self, params: PoissonParams, horizon: float, seed: int) -> EventStream:
        return simulate_poisson(params.rates, horizon, seed)
