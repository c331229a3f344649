from __future__ import annotations

from typing import Any

import numpy as np

from pointprocess.errors import InvalidParameter

from .base import MatrixKernel, _listify, as_matrix


class TriangularKernel(MatrixKernel):
    """
    K_ij(t) = alpha_ij * (1 - t / H_ij) on [0, H_ij).

    Continuous at the support edge, which keeps its spectrum free of the
    slowly decaying oscillation a jump produces.
    """

    key = "triangular"
    name = "Triangular kernel"

    def __init__(self, alpha: Any, support: Any, dim: int | None = None) -> None:
        self.alpha = as_matrix(alpha, "alpha", dim)
        super().__init__(support, self.alpha.shape[0])
        if not np.all(np.isfinite(self._support) & (self._support > 0)):
            raise InvalidParameter(
                "triangular kernels need finite positive supports", support=self._support
            )

    def evaluate(self, t: Any) -> np.ndarray:
        lags = np.asarray(t, dtype=float)[..., None, None]
        ramp = self.alpha * (1.0 - lags / self._support)
        return np.where(self._in_support(lags), ramp, 0.0)

    def integral(self) -> np.ndarray:
        return 0.5 * self.alpha * self._support

    def fourier(self, omega: Any) -> np.ndarray:
        w = np.asarray(omega, dtype=float)[..., None, None]
        h = self._support
        small = np.abs(w * h) < 1e-3
        safe = np.where(small, 1.0, w)
        exact = self.alpha * (
            1.0 / (1j * safe) + (1.0 - np.exp(-1j * safe * h)) / (safe**2 * h)
        )
        series = self.alpha * (h / 2 - 1j * w * h**2 / 6 - w**2 * h**3 / 24)
        return np.where(small, series, exact)

    def params(self) -> dict[str, Any]:
        return {"alpha": _listify(self.alpha), "support": _listify(self._support)}
