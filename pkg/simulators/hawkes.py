from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from pointprocess import EventStream
from pointprocess.errors import ConfigError, InvalidParameter, UnstableKernel
from pointprocess.excitation import kernel_excitation
from pointprocess.kernels import BaseKernel, build_kernel

from simulators import Simulator, register
from simulators.poisson import as_rates, check_horizon
from simulators.rng import make_rng

logger = logging.getLogger(__name__)

# Lags probed when checking a closed-form kernel for negative entries.
_SIGN_PROBES = 4097


@dataclass(frozen=True, eq=False)
class HawkesParams:
    """
    Baseline rates and excitation kernel of a multivariate Hawkes process.

    lambda_i(t) = baseline_i + sum_j sum_{u < t, mark j} kernel_ij(t - u)
    """

    baseline: np.ndarray
    kernel: BaseKernel

    def __post_init__(self) -> None:
        baseline = as_rates(self.baseline, "baseline")
        kernel = build_kernel(self.kernel)
        if kernel.dim != baseline.size:
            raise InvalidParameter(
                "baseline and kernel dimensions differ", baseline=baseline.size, kernel=kernel.dim
            )
        reach = kernel.effective_support()
        probe = np.linspace(0.0, reach, _SIGN_PROBES) if reach > 0 else np.zeros(1)
        if np.min(kernel.evaluate(probe)) < 0:
            raise InvalidParameter("Hawkes kernels must be entrywise non-negative")
        object.__setattr__(self, "baseline", baseline)
        object.__setattr__(self, "kernel", kernel)

    @property
    def dim(self) -> int:
        return int(self.baseline.size)

    @property
    def branching_ratio(self) -> float:
        return self.kernel.spectral_radius()

    def check_stability(self) -> None:
        radius = self.branching_ratio
        if not radius < 1.0:
            raise UnstableKernel(
                f"spectral radius of the integrated kernel is {radius:.6g} (must be < 1)",
                spectral_radius=radius,
            )

    def stationary_rates(self) -> np.ndarray:
        """Mean rates (I - int K)^-1 baseline."""
        self.check_stability()
        return np.linalg.solve(np.eye(self.dim) - self.kernel.integral(), self.baseline)

    def default_burn_in(self) -> float:
        return 10.0 * self.kernel.effective_support()

    def to_dict(self) -> dict[str, Any]:
        return {"type": "hawkes", "baseline": self.baseline.tolist(), "kernel": self.kernel.to_dict()}


@dataclass(frozen=True, eq=False)
class HawkesPath:
    """
    A simulated Hawkes path: the retained stream on [0, T) plus the burn-in
    events (negative times) that still drive the intensity early in the window.
    """

    stream: EventStream
    history_times: np.ndarray
    history_marks: np.ndarray
    params: HawkesParams
    burn_in: float

    def intensity(self, times: Any) -> np.ndarray:
        """Conditional intensity at the given times, shape (n, d)."""
        times = np.asarray(times, dtype=float).reshape(-1)
        all_times = np.concatenate([self.history_times, self.stream.times])
        all_marks = np.concatenate([self.history_marks, self.stream.marks])
        excitation = kernel_excitation(self.params.kernel, all_times, all_marks, times)
        return self.params.baseline + excitation


def _excitation_at(
    fn: Any, lags: np.ndarray, marks: np.ndarray, dim: int
) -> np.ndarray:
    if lags.size == 0:
        return np.zeros(dim)
    values = fn(lags)
    return values[np.arange(lags.size), :, marks].sum(axis=0)


def simulate_hawkes_path(
    params: HawkesParams, horizon: float, seed: int, burn_in: float | None = None
) -> HawkesPath:
    """
    Ogata thinning on [-burn_in, horizon).

    The dominating rate is the baseline plus the kernel envelope summed over
    the recent events; it bounds the intensity until the next event, so each
    candidate is accepted with probability intensity / bound.
    """
    params.check_stability()
    horizon = check_horizon(horizon)
    if burn_in is None:
        burn_in = params.default_burn_in()
    if burn_in < 0:
        raise InvalidParameter("burn-in must be non-negative", burn_in=burn_in)

    rng = make_rng(seed)
    kernel = params.kernel
    d = params.dim
    eta = params.baseline
    reach = kernel.effective_support()

    times: list[float] = []
    marks: list[int] = []
    oldest = 0
    t = -float(burn_in)
    while True:
        while oldest < len(times) and t - times[oldest] >= reach:
            oldest += 1
        window_t = np.asarray(times[oldest:])
        window_m = np.asarray(marks[oldest:], dtype=np.int64)

        bound = float(eta.sum() + _excitation_at(kernel.envelope, t - window_t, window_m, d).sum())
        if bound <= 0.0:
            break
        t += rng.exponential(1.0 / bound)
        if t >= horizon:
            break

        rates = eta + _excitation_at(kernel.evaluate, t - window_t, window_m, d)
        u = rng.random() * bound
        cumulative = np.cumsum(rates)
        if u < cumulative[-1]:
            if times and t <= times[-1]:
                continue
            times.append(t)
            marks.append(int(np.searchsorted(cumulative, u, side="right")))

    all_times = np.asarray(times, dtype=float)
    all_marks = np.asarray(marks, dtype=np.int64)
    split = int(np.searchsorted(all_times, 0.0, side="left"))
    stream = EventStream(
        times=all_times[split:], marks=all_marks[split:], horizon=horizon, dim=d
    )
    logger.debug(
        "hawkes: %d events kept on [0, %g), %d in burn-in of %g",
        len(stream),
        horizon,
        split,
        burn_in,
    )
    return HawkesPath(
        stream=stream,
        history_times=all_times[:split],
        history_marks=all_marks[:split],
        params=params,
        burn_in=float(burn_in),
    )


def simulate_hawkes(params: HawkesParams, horizon: float, seed: int) -> EventStream:
    return simulate_hawkes_path(params, horizon, seed).stream


@register
class HawkesSimulator(Simulator):
    key = "hawkes"
    name = "Multivariate Hawkes"

    def parse_params(self, spec: dict[str, Any]) -> HawkesParams:
        missing = {"baseline", "kernel"} - set(spec)
        if missing:
            raise ConfigError(f"hawkes model needs {sorted(missing)}")
        params = HawkesParams(spec["baseline"], spec["kernel"])
        params.check_stability()
        return params

    def simulate(self, params: HawkesParams, horizon: float, seed: int) -> EventStream:
        return simulate_hawkes(params, horizon, seed)
