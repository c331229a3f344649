from __future__ import annotations

from .algorithm import InnovationsSolution, innovations_recursion, solve_innovations
from .shot_noise import ShotKernelEstimate, leakage_ratio, recover_shot_kernel, shot_kernel_from_solution

__all__ = [
    "InnovationsSolution",
    "ShotKernelEstimate",
    "innovations_recursion",
    "leakage_ratio",
    "recover_shot_kernel",
    "shot_kernel_from_solution",
    "solve_innovations",
]
