from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import InvalidParameter, NonPositiveRate
from .kernels.base import BaseKernel, as_matrix


@dataclass(frozen=True)
class LagGrid:
    """Uniform lag grid with midpoints (k + 1/2) * step, k = 0..length-1."""

    step: float
    length: int

    def __post_init__(self) -> None:
        if not (isinstance(self.step, numbers.Real) and math.isfinite(self.step) and self.step > 0):
            raise InvalidParameter("grid step must be positive", step=self.step)
        if not (isinstance(self.length, (int, np.integer)) and self.length >= 1):
            raise InvalidParameter("grid length must be a positive integer", length=self.length)
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "length", int(self.length))

    @property
    def lags(self) -> np.ndarray:
        return (np.arange(self.length) + 0.5) * self.step

    @property
    def span(self) -> float:
        return self.length * self.step

    def truncated(self, length: int) -> LagGrid:
        return LagGrid(self.step, length)


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


class KernelGrid(BaseKernel):
    """
    A matrix kernel sampled at the midpoints of a LagGrid.

    Between samples the kernel is piecewise constant: the value at lag t is
    values[floor(t / step)] for 0 <= t < span, and zero outside that range
    or beyond the per-entry supports.
    """

    key = "grid"
    name = "Sampled kernel"

    def __init__(self, grid: LagGrid, values: Any, supports: Any = None) -> None:
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None, None]
        if values.ndim != 3 or values.shape[0] != grid.length or values.shape[1] != values.shape[2]:
            raise InvalidParameter(
                "kernel values must have shape (p, d, d)",
                shape=list(values.shape),
                p=grid.length,
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("kernel values must be finite")
        d = values.shape[1]
        if supports is None:
            supports = np.full((d, d), grid.span)
        supports = as_matrix(supports, "supports", d)
        if np.any(supports < 0) or np.any(supports > grid.span * (1 + 1e-12)):
            raise InvalidParameter(
                "supports must lie in [0, p * step]", span=grid.span, supports=supports
            )
        self.grid = grid
        self.values = _frozen(values)
        self.supports = _frozen(np.minimum(supports, grid.span))

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def support(self) -> np.ndarray:
        return np.array(self.supports)

    @property
    def lags(self) -> np.ndarray:
        return self.grid.lags

    def evaluate(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.floor(t / self.grid.step)
        inside = (t >= 0) & (idx < self.grid.length)
        safe = np.where(inside, idx, 0).astype(np.int64)
        out = self.values[safe]
        mask = inside[..., None, None] & (t[..., None, None] < self.supports)
        return np.where(mask, out, 0.0)

    def envelope(self, t: Any) -> np.ndarray:
        tail = np.maximum.accumulate(np.maximum(self.values, 0.0)[::-1], axis=0)[::-1]
        t = np.asarray(t, dtype=float)
        idx = np.floor(np.maximum(t, 0.0) / self.grid.step)
        inside = idx < self.grid.length
        safe = np.where(inside, idx, 0).astype(np.int64)
        return np.where(inside[..., None, None], tail[safe], 0.0)

    def _support_weights(self) -> np.ndarray:
        """Fraction of each bin that lies below the entry's support, shape (p, d, d)."""
        left = self.grid.step * np.arange(self.grid.length)
        frac = (self.supports[None, :, :] - left[:, None, None]) / self.grid.step
        return np.clip(frac, 0.0, 1.0)

    def integral(self) -> np.ndarray:
        return self.grid.step * (self._support_weights() * self.values).sum(axis=0)

    @property
    def characteristic_rate(self) -> float:
        return 1.0 / self.grid.step

    def fourier(self, omega: Any) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(w, self.lags))
        return self.grid.step * np.tensordot(phases, self._support_weights() * self.values, axes=(-1, 0))

    def params(self) -> dict[str, Any]:
        return {
            "delta": self.grid.step,
            "p": self.grid.length,
            "d": self.dim,
            "values": [row.reshape(-1).tolist() for row in self.values],
            "supports": self.supports.reshape(-1).tolist(),
        }

    @classmethod
    def from_params(cls, params: dict[str, Any]) -> KernelGrid:
        grid = LagGrid(float(params["delta"]), int(params["p"]))
        d = int(params["d"])
        values = np.asarray(params["values"], dtype=float).reshape(grid.length, d, d)
        supports = params.get("supports")
        if supports is not None:
            supports = np.asarray(supports, dtype=float).reshape(d, d)
        return cls(grid, values, supports)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KernelGrid):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.supports, other.supports)
        )

    __hash__ = None  # type: ignore[assignment]


class CovarianceGrid:
    """
    Mean rates and the covariance density sampled at lag midpoints.

    density[k, i, j] approximates C_ij((k + 1/2) * step): the covariance
    density of a mark-i event at s and a mark-j event at s + tau. Negative
    lags follow C(-tau) = C(tau)^T. The lag-zero atom diag(mean_rates) is
    kept separate and never folded into density.
    """

    def __init__(self, grid: LagGrid, mean_rates: Any, density: Any) -> None:
        rates = np.atleast_1d(np.asarray(mean_rates, dtype=float))
        density = np.asarray(density, dtype=float)
        if density.ndim == 1:
            density = density[:, None, None]
        d = rates.size
        if density.shape != (grid.length, d, d):
            raise InvalidParameter(
                "covariance density must have shape (p, d, d)",
                shape=list(density.shape),
                expected=[grid.length, d, d],
            )
        if not np.all(rates > 0):
            raise NonPositiveRate("mean rates must be positive", mean_rates=rates)
        if not np.all(np.isfinite(density)):
            raise InvalidParameter("covariance density must be finite")
        self.grid = grid
        self.mean_rates = _frozen(rates)
        self.density = _frozen(density)

    @property
    def dim(self) -> int:
        return int(self.mean_rates.size)

    @property
    def atom(self) -> np.ndarray:
        return np.diag(self.mean_rates)

    def truncated(self, length: int) -> CovarianceGrid:
        if not 1 <= length <= self.grid.length:
            raise InvalidParameter(
                "truncation length outside the grid", length=length, p=self.grid.length
            )
        return CovarianceGrid(self.grid.truncated(length), self.mean_rates, self.density[:length])

    def autocovariance(self, order: int, ridge: float = 0.0) -> np.ndarray:
        """
        Bin-count autocovariance blocks Gamma_0..Gamma_order.

        Gamma_0 = step * D + step^2 * (C_0 + C_0^T) / 2 and
        Gamma_k = step^2 * C_{k-1}^T for k >= 1, so coefficient k of any
        recursion run on this sequence describes the lag (k - 1/2) * step.
        Gamma_{-k} = Gamma_k^T.
        """
        if not 0 <= order <= self.grid.length:
            raise InvalidParameter("order outside the grid", order=order, p=self.grid.length)
        dt = self.grid.step
        c0 = self.density[0]
        out = np.empty((order + 1, self.dim, self.dim))
        out[0] = dt * self.atom + dt**2 * 0.5 * (c0 + c0.T)
        if ridge:
            out[0] += ridge * np.eye(self.dim)
        if order:
            out[1:] = dt**2 * np.swapaxes(self.density[:order], 1, 2)
        return out

    def reversed(self) -> CovarianceGrid:
        """Covariance of the time-reversed process."""
        return CovarianceGrid(self.grid, self.mean_rates, np.swapaxes(self.density, 1, 2))

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.grid.step,
            "p": self.grid.length,
            "d": self.dim,
            "values": [row.reshape(-1).tolist() for row in self.density],
            "mean_rates": self.mean_rates.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CovarianceGrid:
        grid = LagGrid(float(data["delta"]), int(data["p"]))
        d = int(data["d"])
        density = np.asarray(data["values"], dtype=float).reshape(grid.length, d, d)
        return cls(grid, data["mean_rates"], density)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CovarianceGrid):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.mean_rates, other.mean_rates)
            and np.array_equal(self.density, other.density)
        )

    __hash__ = None  # type: ignore[assignment]


def sample_kernel(kernel: BaseKernel, grid: LagGrid) -> KernelGrid:
    """Sample a closed-form kernel at the grid midpoints."""
    values = kernel.evaluate(grid.lags)
    supports = np.minimum(kernel.support, grid.span)
    return KernelGrid(grid, values, supports)
