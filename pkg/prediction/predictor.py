"""
Best linear unbiased predictor of the intensity.

AR form: lambda^_i(t) = lambda^0_i + sum_j sum_{u < t, mark j} K_ij(t - u), with
the intercept lambda^0 = rate - (int K) rate so that E lambda^ = rate.

MA form: the window is cut into bins of the innovations step; the predicted
count of bin b is step * lambda^_b and

    lambda^_b = rate + sum_{h=1..m} Theta(m, h) e_{b-h},  m = min(b, n),
    e_b = N_b - step * lambda^_b.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from innovations import InnovationsSolution
from pointprocess import BaseKernel, EventStream, build_kernel
from pointprocess.errors import GridOutOfRange, InvalidParameter, NonPositiveRate
from pointprocess.excitation import kernel_excitation

logger = logging.getLogger(__name__)


def _check_rates(mean_rates: Any, dim: int) -> np.ndarray:
    rates = np.atleast_1d(np.asarray(mean_rates, dtype=float))
    if rates.shape != (dim,):
        raise InvalidParameter("mean rates do not match the dimension", d=dim, got=list(rates.shape))
    if not np.all(rates > 0):
        raise NonPositiveRate("mean rates must be positive", mean_rates=rates)
    return rates


@dataclass(frozen=True, eq=False)
class Predictor:
    mean_rates: np.ndarray
    intercept: np.ndarray
    kernel: BaseKernel | None = None
    innovations: InnovationsSolution | None = None

    @property
    def form(self) -> str:
        return "AR" if self.kernel is not None else "MA"

    @property
    def dim(self) -> int:
        return int(self.mean_rates.size)

    @property
    def memory(self) -> float:
        """How far back the predictor looks."""
        if self.kernel is not None:
            return float(self.kernel.effective_support())
        return self.innovations.length * self.innovations.step

    @classmethod
    def from_innovations(cls, solution: InnovationsSolution, mean_rates: Any) -> Predictor:
        rates = _check_rates(mean_rates, solution.dim)
        return cls(mean_rates=rates, intercept=rates.copy(), innovations=solution)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "form": self.form,
            "mean_rates": self.mean_rates.tolist(),
            "intercept": self.intercept.tolist(),
        }
        if self.kernel is not None:
            out["kernel"] = self.kernel.to_dict()
        else:
            out["innovations"] = {"n": self.innovations.length, "delta": self.innovations.step}
        return out


def assemble_predictor(kernel: BaseKernel | dict, mean_rates: Any) -> Predictor:
    """
    Unbiased AR-form predictor from a kernel in intensity orientation.

    Raises:
        NonPositiveRate: a mean rate is not positive
    """
    kernel = build_kernel(kernel)
    rates = _check_rates(mean_rates, kernel.dim)
    intercept = rates - kernel.integral() @ rates
    if np.any(intercept < 0):
        logger.warning("negative predictor intercept %s", intercept.tolist())
    return Predictor(mean_rates=rates, intercept=intercept, kernel=kernel)


def _check_times(pred: Predictor, stream: EventStream, times: np.ndarray, require_history: bool) -> None:
    if stream.dim != pred.dim:
        raise InvalidParameter("stream and predictor dimensions differ", stream=stream.dim, predictor=pred.dim)
    end = stream.horizon
    first = stream.start + pred.memory if require_history else stream.start
    if times.size and (times.min() < first or times.max() > end):
        raise GridOutOfRange(
            "evaluation times outside the observed window",
            earliest=float(times.min()),
            latest=float(times.max()),
            allowed=[first, end],
        )


def _predict_ma(pred: Predictor, stream: EventStream, times: np.ndarray) -> np.ndarray:
    sol = pred.innovations
    step, n, d = sol.step, sol.length, sol.dim
    if times.size == 0:
        return np.zeros((0, d))
    bins = np.floor((times - stream.start) / step).astype(np.int64)
    n_bins = int(bins.max()) + 1
    event_bins = np.floor((stream.times - stream.start) / step).astype(np.int64)
    keep = event_bins < n_bins
    counts = np.zeros((n_bins, d))
    np.add.at(counts, (event_bins[keep], stream.marks[keep]), 1.0)

    rate_hat = np.empty((n_bins, d))
    resid = np.empty((n_bins, d))
    for b in range(n_bins):
        m = min(b, n)
        # Theta(m, h) applied to e_{b-h}, h = 1..m
        past = resid[b - m : b][::-1]
        rate_hat[b] = pred.mean_rates + np.einsum("hij,hj->i", sol.theta[m, 1 : m + 1], past)
        resid[b] = counts[b] - step * rate_hat[b]
    return rate_hat[bins]


def predict_intensity(
    pred: Predictor,
    stream: EventStream,
    times: Any,
    require_history: bool = False,
) -> np.ndarray:
    """
    Predicted intensity at ``times``, shape (len(times), d).

    Only events strictly before each time are used. Times must lie in the
    observed window; with ``require_history`` they must also leave a full
    predictor memory of observations behind them.

    Raises:
        GridOutOfRange: a time falls outside the allowed range
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    _check_times(pred, stream, times, require_history)
    if pred.kernel is None:
        return _predict_ma(pred, stream, times)
    excitation = kernel_excitation(pred.kernel, stream.times, stream.marks, times)
    return pred.intercept + excitation
