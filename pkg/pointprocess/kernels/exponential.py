from __future__ import annotations

import math
from typing import Any

import numpy as np

from pointprocess.errors import InvalidParameter

from .base import MatrixKernel, _listify, as_matrix


class ExponentialKernel(MatrixKernel):
    """
    K_ij(t) = alpha_ij * exp(-beta_ij * t) on [0, H_ij).

    Without a support the kernel is untruncated (H = inf).
    """

    key = "exponential"
    name = "Exponential kernel"

    def __init__(self, alpha: Any, beta: Any, support: Any = None, dim: int | None = None) -> None:
        self.alpha = as_matrix(alpha, "alpha", dim)
        d = self.alpha.shape[0]
        self.beta = as_matrix(beta, "beta", d)
        if not np.all(self.beta > 0):
            raise InvalidParameter("decay rates must be positive", beta=self.beta)
        super().__init__(support, d)

    def evaluate(self, t: Any) -> np.ndarray:
        lags = np.asarray(t, dtype=float)[..., None, None]
        decay = np.exp(-self.beta * np.maximum(lags, 0.0))
        return np.where(self._in_support(lags), self.alpha * decay, 0.0)

    def integral(self) -> np.ndarray:
        return self.alpha / self.beta * -np.expm1(-self.beta * self._support)

    def fourier(self, omega: Any) -> np.ndarray:
        w = np.asarray(omega, dtype=float)[..., None, None]
        s = self.beta + 1j * w
        unbounded = np.isinf(self._support)
        h = np.where(unbounded, 0.0, self._support)
        tail = np.where(unbounded, 0.0, np.exp(-s * h))
        return self.alpha * (1.0 - tail) / s

    @property
    def characteristic_rate(self) -> float:
        active = self.beta[self.alpha != 0]
        return float(active.max() if active.size else self.beta.max())

    def effective_support(self, tol: float = 1e-15) -> float:
        active = self.alpha != 0
        if not np.any(active):
            return 0.0
        reach = np.minimum(self._support, -math.log(tol) / self.beta)
        return float(reach[active].max())

    def params(self) -> dict[str, Any]:
        return {
            "alpha": _listify(self.alpha),
            "beta": _listify(self.beta),
            **self._support_dict(),
        }
