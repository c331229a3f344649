from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pointprocess import CovarianceGrid, KernelGrid, LagGrid

from .algorithm import InnovationsSolution, solve_innovations

logger = logging.getLogger(__name__)

LEAKAGE_TOLERANCE = 0.01


@dataclass(frozen=True)
class ShotKernelEstimate:
    kernel: KernelGrid
    support: float | None
    leakage: float
    flagged: bool


def leakage_ratio(kernel: KernelGrid, support: float) -> float:
    """Largest entry beyond ``support`` relative to the largest entry overall."""
    peaks = np.abs(kernel.values).max(axis=(1, 2))
    top = peaks.max()
    if top == 0:
        return 0.0
    beyond = peaks[kernel.lags > support]
    return float(beyond.max() / top) if beyond.size else 0.0


def shot_kernel_from_solution(
    solution: InnovationsSolution,
    support: float | None = None,
    tolerance: float = LEAKAGE_TOLERANCE,
) -> ShotKernelEstimate:
    n = solution.length
    kernel = KernelGrid(LagGrid(solution.step, n), solution.row(n))
    leakage = leakage_ratio(kernel, support) if support is not None else 0.0
    flagged = leakage > tolerance
    if flagged:
        logger.warning(
            "innovations row leaks beyond support %g: %.3g of peak; "
            "the covariance does not look like a finite moving average",
            support,
            leakage,
        )
    return ShotKernelEstimate(kernel=kernel, support=support, leakage=leakage, flagged=flagged)


def recover_shot_kernel(
    cov: CovarianceGrid,
    support: float | None = None,
    n: int | None = None,
    tolerance: float = LEAKAGE_TOLERANCE,
) -> ShotKernelEstimate:
    """
    Moving-average kernel of a cluster process from its covariance.

    The last row of the innovations recursion converges to the causal factor
    psi of the spectrum, rate * |1 + psi^|^2. For a Neyman-Scott process psi
    lives on the support of the shot kernel, so mass past ``support`` means
    the input is not of that form and the estimate is flagged.
    """
    return shot_kernel_from_solution(solve_innovations(cov, n), support, tolerance)
