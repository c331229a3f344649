"""
Empirical first- and second-order moments of d-variate event streams.

The covariance density is a pair-count estimator: ordered pairs of distinct
events are histogrammed by lag, normalised by an edge-corrected exposure and
centred by the product of mean rates. Self-pairs are excluded; they make up
the lag-zero atom diag(mean rates), which is kept apart.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pointprocess import CovarianceGrid, EventStream, LagGrid
from pointprocess.conf import get_setting
from pointprocess.errors import EmptyInput, GridTooCoarse, InvalidParameter
from simulators.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentEstimate:
    cov: CovarianceGrid
    n_streams: int
    total_time: float


@dataclass(frozen=True)
class _StreamSummary:
    """Sufficient statistics of one stream for the pooled estimator."""

    pairs: np.ndarray  # (p, d, d) ordered pair counts per lag bin
    events: np.ndarray  # (d,)
    duration: float


def _check_streams(streams: Sequence[EventStream]) -> int:
    if not streams:
        raise EmptyInput("at least one stream is required")
    dims = {s.dim for s in streams}
    if len(dims) != 1:
        raise InvalidParameter("streams must share a dimension", dims=sorted(dims))
    return dims.pop()


def pair_counts(stream: EventStream, grid: LagGrid) -> np.ndarray:
    """
    Ordered pair counts, shape (p, d, d).

    Entry [k, i, j] counts pairs (s, t) with mark(s) = i, mark(t) = j and
    t - s in [k * step, (k + 1) * step), s != t.
    """
    d, p, step = stream.dim, grid.length, grid.step
    counts = np.zeros((p, d, d), dtype=np.int64)
    times, marks = stream.times, stream.marks
    span = grid.span
    for offset in range(1, times.size):
        diffs = times[offset:] - times[:-offset]
        near = diffs < span
        # Gaps grow with the offset, so once no pair is close none will be.
        if not near.any():
            break
        bins = np.minimum(np.floor(diffs[near] / step).astype(np.int64), p - 1)
        np.add.at(counts, (bins, marks[:-offset][near], marks[offset:][near]), 1)
    return counts


def _summarise(stream: EventStream, grid: LagGrid) -> _StreamSummary:
    return _StreamSummary(
        pairs=pair_counts(stream, grid),
        events=stream.counts_per_mark(),
        duration=stream.duration,
    )


def _exposure(duration: float, grid: LagGrid) -> np.ndarray:
    """Edge-corrected observation time per lag bin, T - (k + 1) * step."""
    return duration - (np.arange(grid.length) + 1) * grid.step


def _pooled_density(
    summaries: Sequence[_StreamSummary], grid: LagGrid
) -> tuple[np.ndarray, np.ndarray]:
    pairs = sum(s.pairs for s in summaries)
    events = sum(s.events for s in summaries)
    total_time = sum(s.duration for s in summaries)
    exposure = sum(_exposure(s.duration, grid) for s in summaries)
    rates = events / total_time
    density = pairs / (exposure * grid.step)[:, None, None] - np.outer(rates, rates)
    return rates, density


def estimate_mean_rates(streams: Sequence[EventStream]) -> np.ndarray:
    """Events per mark divided by the total observed time."""
    _check_streams(streams)
    events = sum(s.counts_per_mark() for s in streams)
    total_time = sum(s.duration for s in streams)
    rates = events / total_time
    if np.any(rates == 0):
        logger.warning(
            "mark(s) %s have no events; zero mean rates cannot feed a solver",
            np.flatnonzero(rates == 0).tolist(),
        )
    return rates


def _check_grid(streams: Sequence[EventStream], grid: LagGrid) -> None:
    shortest = min(s.duration for s in streams)
    if not grid.span < shortest / 2:
        raise GridTooCoarse(
            "lag span must be less than half the shortest stream",
            span=grid.span,
            shortest=shortest,
        )


def estimate_moments(streams: Sequence[EventStream], grid: LagGrid) -> MomentEstimate:
    _check_streams(streams)
    _check_grid(streams, grid)
    summaries = [_summarise(s, grid) for s in streams]
    rates, density = _pooled_density(summaries, grid)
    total_time = float(sum(s.duration for s in streams))
    logger.info(
        "covariance estimated from %d stream(s), %.6g time units, p=%d, step=%g",
        len(streams),
        total_time,
        grid.length,
        grid.step,
    )
    return MomentEstimate(
        cov=CovarianceGrid(grid, rates, density),
        n_streams=len(streams),
        total_time=total_time,
    )


def estimate_covariance_density(streams: Sequence[EventStream], grid: LagGrid) -> CovarianceGrid:
    """
    Pooled pair-count estimate of the covariance density.

    C[k, i, j] = pairs[k, i, j] / (sum_s (T_s - (k + 1) step) * step)
                 - rate_i * rate_j

    A stream with a single event has no ordered pairs, so every lag gets the
    centring term alone: -rate**2, not zero.

    Raises:
        EmptyInput: no streams
        GridTooCoarse: p * step >= min T / 2
        NonPositiveRate: a mark with no events at all
    """
    return estimate_moments(streams, grid).cov


def bootstrap_covariance_se(
    streams: Sequence[EventStream],
    grid: LagGrid,
    n_resamples: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """
    Stream-level bootstrap standard errors of the density, shape (p, d, d).

    Whole streams are resampled with replacement, which keeps the dependence
    within each stream intact.
    """
    _check_streams(streams)
    _check_grid(streams, grid)
    if n_resamples is None:
        n_resamples = int(get_setting("BLP_BOOTSTRAP_RESAMPLES"))
    if n_resamples < 2:
        raise InvalidParameter("need at least two bootstrap resamples", n_resamples=n_resamples)
    summaries = [_summarise(s, grid) for s in streams]
    rng = make_rng(seed)
    draws = np.empty((n_resamples, grid.length, streams[0].dim, streams[0].dim))
    n = len(summaries)
    for b in range(n_resamples):
        picks = rng.integers(0, n, size=n)
        _, draws[b] = _pooled_density([summaries[i] for i in picks], grid)
    return draws.std(axis=0, ddof=1)
