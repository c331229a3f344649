from __future__ import annotations

from .errors import PointProcessError
from .grids import CovarianceGrid, KernelGrid, LagGrid, sample_kernel
from .kernels import BaseKernel, build_kernel, register_kernel_type
from .streams import EventStream, bin_counts, validate_stream


register_kernel_type(KernelGrid)

__all__ = [
    "BaseKernel",
    "CovarianceGrid",
    "EventStream",
    "KernelGrid",
    "LagGrid",
    "PointProcessError",
    "bin_counts",
    "build_kernel",
    "sample_kernel",
    "validate_stream",
]
