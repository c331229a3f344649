from __future__ import annotations

from .estimators import (
    MomentEstimate,
    bootstrap_covariance_se,
    estimate_covariance_density,
    estimate_mean_rates,
    estimate_moments,
    pair_counts,
)
from .oracles import (
    exponential_hawkes_covariance_oracle,
    hawkes_covariance_oracle,
    neyman_scott_covariance_oracle,
    random_stationary_covariance,
)

__all__ = [
    "MomentEstimate",
    "bootstrap_covariance_se",
    "estimate_covariance_density",
    "estimate_mean_rates",
    "estimate_moments",
    "exponential_hawkes_covariance_oracle",
    "hawkes_covariance_oracle",
    "neyman_scott_covariance_oracle",
    "pair_counts",
    "random_stationary_covariance",
]
