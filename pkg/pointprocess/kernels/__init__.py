from __future__ import annotations

from .base import BaseKernel, SumKernel
from .box import BoxKernel
from .exponential import ExponentialKernel
from .registry import KERNEL_TYPES, build_kernel, get_kernel_type, register_kernel_type
from .triangular import TriangularKernel
from .zero import ZeroKernel


register_kernel_type(ZeroKernel)
register_kernel_type(ExponentialKernel)
register_kernel_type(BoxKernel)
register_kernel_type(TriangularKernel)
register_kernel_type(SumKernel)

__all__ = [
    "KERNEL_TYPES",
    "BaseKernel",
    "BoxKernel",
    "ExponentialKernel",
    "SumKernel",
    "TriangularKernel",
    "ZeroKernel",
    "build_kernel",
    "get_kernel_type",
    "register_kernel_type",
]
