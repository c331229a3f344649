from __future__ import annotations

from typing import Any

import numpy as np

from .base import BaseKernel


class ZeroKernel(BaseKernel):
    key = "zero"
    name = "Zero kernel"

    def __init__(self, dim: int = 1) -> None:
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def support(self) -> np.ndarray:
        return np.zeros((self._dim, self._dim))

    def evaluate(self, t: Any) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.zeros(t.shape + (self._dim, self._dim))

    def integral(self) -> np.ndarray:
        return np.zeros((self._dim, self._dim))

    def fourier(self, omega: Any) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return np.zeros(omega.shape + (self._dim, self._dim), dtype=complex)

    def params(self) -> dict[str, Any]:
        return {"dim": self._dim}
