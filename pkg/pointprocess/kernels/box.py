from __future__ import annotations

from typing import Any

import numpy as np

from pointprocess.errors import InvalidParameter

from .base import MatrixKernel, _listify, as_matrix


class BoxKernel(MatrixKernel):
    """K_ij(t) = height_ij on [0, H_ij)."""

    key = "box"
    name = "Box kernel"

    def __init__(self, height: Any, support: Any, dim: int | None = None) -> None:
        self.height = as_matrix(height, "height", dim)
        super().__init__(support, self.height.shape[0])
        if not np.all(np.isfinite(self._support) & (self._support > 0)):
            raise InvalidParameter("box kernels need finite positive supports", support=self._support)

    def evaluate(self, t: Any) -> np.ndarray:
        lags = np.asarray(t, dtype=float)[..., None, None]
        return np.where(self._in_support(lags), self.height, 0.0)

    def integral(self) -> np.ndarray:
        return self.height * self._support

    def fourier(self, omega: Any) -> np.ndarray:
        w = np.asarray(omega, dtype=float)[..., None, None]
        small = np.abs(w * self._support) < 1e-8
        safe = np.where(small, 1.0, w)
        exact = self.height * (1.0 - np.exp(-1j * safe * self._support)) / (1j * safe)
        return np.where(small, self.height * self._support + 0j, exact)

    def params(self) -> dict[str, Any]:
        return {"height": _listify(self.height), "support": _listify(self._support)}
