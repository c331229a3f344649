from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pointprocess import CovarianceGrid, LagGrid
from pointprocess.conf import get_setting
from pointprocess.errors import InvalidParameter


@dataclass(frozen=True, eq=False)
class DiscretisedWH:
    """
    The Wiener-Hopf equation M(tau) = K(tau) D + int_0^{p step} K(u) M(tau - u) du
    on (0, p * step], discretised on the covariance grid.

    M(tau) = C(tau)^T and D = diag(mean rates). Solvers see it as the
    block Yule-Walker system on the bin-count autocovariances
    Gamma_0..Gamma_p (see CovarianceGrid.autocovariance).
    """

    cov: CovarianceGrid
    order: int | None = None
    ridge: bool = False

    def __post_init__(self) -> None:
        order = self.cov.grid.length if self.order is None else int(self.order)
        if not 1 <= order <= self.cov.grid.length:
            raise InvalidParameter(
                "solver order must be between 1 and the covariance grid length",
                order=order,
                p=self.cov.grid.length,
            )
        object.__setattr__(self, "order", order)

    @property
    def dim(self) -> int:
        return self.cov.dim

    @property
    def step(self) -> float:
        return self.cov.grid.step

    @property
    def kernel_grid(self) -> LagGrid:
        return LagGrid(self.step, self.order)

    @property
    def ridge_size(self) -> float:
        """Ridge eps = scale * tr(Gamma_0) / d, or 0 when no ridge is requested."""
        if not self.ridge:
            return 0.0
        gamma0 = self.cov.autocovariance(0)[0]
        return float(get_setting("BLP_RIDGE_SCALE")) * float(np.trace(gamma0)) / self.dim

    def autocovariance(self) -> np.ndarray:
        return self.cov.autocovariance(self.order, ridge=self.ridge_size)
