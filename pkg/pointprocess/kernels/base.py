from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from pointprocess.errors import InvalidParameter


def as_matrix(value: Any, name: str, dim: int | None = None) -> np.ndarray:
    """Coerce a scalar or nested list into a square float matrix."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full((dim or 1, dim or 1), float(arr))
    elif arr.ndim == 1 and arr.size == 1:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameter(f"{name} must be a square matrix", shape=list(arr.shape))
    if dim is not None and arr.shape[0] != dim:
        raise InvalidParameter(f"{name} must be {dim}x{dim}", shape=list(arr.shape))
    return arr


def _listify(arr: np.ndarray) -> Any:
    if arr.shape == (1, 1):
        return float(arr[0, 0])
    return [[None if np.isinf(v) else float(v) for v in row] for row in arr]


class BaseKernel(ABC):
    """
    A d x d matrix function of the lag t >= 0.

    Entry [i, j] is the effect of a mark-j event on the mark-i intensity.
    Every kernel is zero for t < 0 and for t >= its per-entry support.
    """

    key: str = ""
    name: str = ""

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    @abstractmethod
    def support(self) -> np.ndarray:
        """Per-entry support bounds H, shape (d, d); inf where unbounded."""

    @abstractmethod
    def evaluate(self, t: Any) -> np.ndarray:
        """Kernel values at lags t, shape t.shape + (d, d)."""

    @abstractmethod
    def integral(self) -> np.ndarray:
        """Integral over [0, inf) of each entry, shape (d, d)."""

    def envelope(self, t: Any) -> np.ndarray:
        """
        A non-increasing entrywise upper bound of the kernel on [t, inf).

        Thinning uses this as its dominating rate. Monotone kernels are their
        own envelope once negative parts are clipped.
        """
        return np.maximum(self.evaluate(t), 0.0)

    def fourier(self, omega: Any) -> np.ndarray:
        """Transform int K(t) exp(-i omega t) dt, shape omega.shape + (d, d)."""
        raise NotImplementedError(f"{self.key} kernel has no analytic transform")

    @property
    def characteristic_rate(self) -> float:
        """Inverse time scale used to size frequency grids."""
        finite = self.support[np.isfinite(self.support) & (self.support > 0)]
        return float(1.0 / finite.min()) if finite.size else 1.0

    def effective_support(self, tol: float = 1e-15) -> float:
        """Largest lag beyond which every entry is negligible."""
        h = self.support
        return float(h.max()) if h.size else 0.0

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.integral()))))

    @abstractmethod
    def params(self) -> dict[str, Any]: ...

    @classmethod
    def from_params(cls, params: dict[str, Any]) -> BaseKernel:
        return cls(**params)

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.key, **self.params()}

    def __add__(self, other: BaseKernel) -> BaseKernel:
        if not isinstance(other, BaseKernel):
            return NotImplemented
        return SumKernel([self, other])


class MatrixKernel(BaseKernel):
    """Shared plumbing for kernels defined by per-entry parameter matrices."""

    def __init__(self, support: Any = None, dim: int | None = None) -> None:
        if support is None:
            self._support = np.full((dim or 1, dim or 1), np.inf)
        else:
            self._support = as_matrix(support, "support", dim)
        if np.any(np.isnan(self._support)) or np.any(self._support < 0):
            raise InvalidParameter("supports must be non-negative", support=self._support)

    @property
    def dim(self) -> int:
        return int(self._support.shape[0])

    @property
    def support(self) -> np.ndarray:
        return self._support.copy()

    def _in_support(self, lags: np.ndarray) -> np.ndarray:
        return (lags >= 0) & (lags < self._support)

    def _support_dict(self) -> dict[str, Any]:
        if np.all(np.isinf(self._support)):
            return {}
        return {"support": _listify(self._support)}


class SumKernel(BaseKernel):
    key = "sum"
    name = "Sum of kernels"

    def __init__(self, parts: list[BaseKernel]) -> None:
        flat: list[BaseKernel] = []
        for part in parts:
            flat.extend(part.parts if isinstance(part, SumKernel) else [part])
        dims = {p.dim for p in flat}
        if len(dims) != 1:
            raise InvalidParameter("summed kernels must share a dimension", dims=sorted(dims))
        self.parts = flat

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    @property
    def support(self) -> np.ndarray:
        return np.maximum.reduce([p.support for p in self.parts])

    @property
    def characteristic_rate(self) -> float:
        return max(p.characteristic_rate for p in self.parts)

    def evaluate(self, t: Any) -> np.ndarray:
        return sum(p.evaluate(t) for p in self.parts)

    def envelope(self, t: Any) -> np.ndarray:
        return sum(p.envelope(t) for p in self.parts)

    def integral(self) -> np.ndarray:
        return sum(p.integral() for p in self.parts)

    def fourier(self, omega: Any) -> np.ndarray:
        return sum(p.fourier(omega) for p in self.parts)

    def effective_support(self, tol: float = 1e-15) -> float:
        return max(p.effective_support(tol) for p in self.parts)

    def params(self) -> dict[str, Any]:
        return {"parts": [p.to_dict() for p in self.parts]}

    @classmethod
    def from_params(cls, params: dict[str, Any]) -> BaseKernel:
        from .registry import build_kernel

        return cls([build_kernel(part) for part in params["parts"]])
