"""
Timing benchmark for the Wiener-Hopf solvers.

Each size gets one synthetic stationary covariance; only ``solve`` is timed.
Solvers run one after another, never concurrently, and their outputs must
agree before any timing is reported.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import stats

from moments import random_stationary_covariance
from pointprocess import LagGrid
from pointprocess.conf import get_setting
from pointprocess.errors import InvalidParameter, SolverDisagreement
from solvers import DiscretisedWH, get_solver

logger = logging.getLogger(__name__)

BENCH_STEP = 0.01
AGREEMENT_TOLERANCE = 1e-6
MIN_SIZES = 4


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict[str, float]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "ci95": [self.ci_low, self.ci_high],
        }


@dataclass(frozen=True)
class BenchReport:
    sizes: list[int]
    dim: int
    repeats: int
    seconds: dict[str, list[float]]
    slopes: dict[str, SlopeFit]
    max_disagreement: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "sizes": self.sizes,
            "d": self.dim,
            "repeats": self.repeats,
            "median_seconds": self.seconds,
            "slopes": {k: v.to_dict() for k, v in self.slopes.items()},
            "max_disagreement": self.max_disagreement,
        }


def fit_slope(sizes: Sequence[int], seconds: Sequence[float]) -> SlopeFit:
    """Least-squares slope of log time against log size, with a 95% t interval."""
    fit = stats.linregress(np.log(sizes), np.log(seconds))
    dof = len(sizes) - 2
    half = float(stats.t.ppf(0.975, dof) * fit.stderr) if dof > 0 else float("inf")
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        ci_low=float(fit.slope) - half,
        ci_high=float(fit.slope) + half,
    )


def _median_time(solver, problem: DiscretisedWH, repeats: int):
    times = []
    kernel = None
    for _ in range(repeats):
        start = time.perf_counter()
        kernel = solver.solve(problem)
        times.append(time.perf_counter() - start)
    return float(np.median(times)), kernel


def _disagreement(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.abs(a).max()), 1.0)
    return float(np.abs(a - b).max()) / scale


def run_bench(
    sizes: Sequence[int],
    d: int = 2,
    solvers: Sequence[str] = ("direct", "whittle"),
    seed: int = 0,
    repeats: int | None = None,
) -> BenchReport:
    """
    Time each solver at each grid size and fit log-log slopes.

    Raises:
        InvalidParameter: fewer than four sizes, or sizes not ascending
        SolverDisagreement: two solvers' kernels differ by more than 1e-6
            relative to the kernel's largest entry
    """
    sizes = [int(p) for p in sizes]
    if len(sizes) < MIN_SIZES:
        raise InvalidParameter(f"bench needs at least {MIN_SIZES} sizes", sizes=sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise InvalidParameter("bench sizes must be positive and ascending", sizes=sizes)
    repeats = int(repeats if repeats is not None else get_setting("BLP_BENCH_REPEATS"))
    if repeats < 1:
        raise InvalidParameter("repeats must be at least 1", repeats=repeats)
    instances = [get_solver(key) for key in solvers]

    seconds: dict[str, list[float]] = {s.key: [] for s in instances}
    worst = 0.0
    for p in sizes:
        cov = random_stationary_covariance(LagGrid(BENCH_STEP, p), d, seed)
        problem = DiscretisedWH(cov)
        kernels = {}
        for solver in instances:
            median, kernel = _median_time(solver, problem, repeats)
            seconds[solver.key].append(median)
            kernels[solver.key] = kernel.values
            logger.info("bench p=%d %s: %.4gs", p, solver.key, median)
        reference = kernels[instances[0].key]
        for key, values in kernels.items():
            gap = _disagreement(reference, values)
            worst = max(worst, gap)
            if gap > AGREEMENT_TOLERANCE:
                raise SolverDisagreement(
                    f"{key} differs from {instances[0].key} by {gap:.3g} at p={p}",
                    p=p,
                    solvers=[instances[0].key, key],
                    disagreement=gap,
                )

    slopes = {key: fit_slope(sizes, times) for key, times in seconds.items()}
    return BenchReport(
        sizes=sizes,
        dim=d,
        repeats=repeats,
        seconds=seconds,
        slopes=slopes,
        max_disagreement=worst,
    )


__all__ = ["BenchReport", "SlopeFit", "fit_slope", "run_bench"]
