"""Empirical scoring of predictors over batteries of streams."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from pointprocess import EventStream
from pointprocess.conf import worker_count
from pointprocess.errors import EmptyInput, InvalidParameter

from .predictor import Predictor, predict_intensity

logger = logging.getLogger(__name__)

IntensityFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class _StreamScore:
    mean_prediction: np.ndarray
    bias: np.ndarray
    count_mse: np.ndarray
    truth_mse: np.ndarray | None
    n_bins: int


@dataclass(frozen=True)
class ScoreReport:
    """
    Per-coordinate scores averaged over streams, each with its Monte-Carlo
    standard error across streams.

    bias is the time average of lambda^ - N / delta; count_mse compares the
    predicted bin count delta * lambda^ with the observed count, per bin and
    per unit time.
    """

    n_streams: int
    n_bins: int
    delta: float
    mean_prediction: np.ndarray
    mean_prediction_se: np.ndarray
    bias: np.ndarray
    bias_se: np.ndarray
    count_mse: np.ndarray
    count_mse_se: np.ndarray
    truth_mse: np.ndarray | None = None
    truth_mse_se: np.ndarray | None = None

    @property
    def count_mse_per_time(self) -> np.ndarray:
        return self.count_mse / self.delta

    def to_dict(self) -> dict[str, Any]:
        out = {
            "n_streams": self.n_streams,
            "n_bins": self.n_bins,
            "delta": self.delta,
            "mean_prediction": self.mean_prediction.tolist(),
            "mean_prediction_se": self.mean_prediction_se.tolist(),
            "bias": self.bias.tolist(),
            "bias_se": self.bias_se.tolist(),
            "count_mse_per_bin": self.count_mse.tolist(),
            "count_mse_per_bin_se": self.count_mse_se.tolist(),
            "count_mse_per_time": self.count_mse_per_time.tolist(),
        }
        if self.truth_mse is not None:
            out["truth_mse"] = self.truth_mse.tolist()
            out["truth_mse_se"] = self.truth_mse_se.tolist()
        return out


def bin_edges(stream: EventStream, delta: float, burn_in: float = 0.0) -> np.ndarray:
    """Left edges of whole bins of width delta in [start + burn_in, horizon)."""
    n = int(math.floor((stream.duration - burn_in) / delta + 1e-9))
    if n < 1:
        raise InvalidParameter(
            "no whole evaluation bin fits in the window", delta=delta, burn_in=burn_in, duration=stream.duration
        )
    return stream.start + burn_in + delta * np.arange(n)


def _score_stream(job: tuple[Predictor, EventStream, float, float, IntensityFn | None]) -> _StreamScore:
    pred, stream, delta, burn_in, intensity = job
    edges = bin_edges(stream, delta, burn_in)
    rate_hat = predict_intensity(pred, stream, edges)
    idx = np.floor((stream.times - edges[0]) / delta).astype(np.int64)
    keep = (stream.times >= edges[0]) & (idx < edges.size)
    counts = np.zeros_like(rate_hat)
    np.add.at(counts, (idx[keep], stream.marks[keep]), 1.0)

    truth = None
    if intensity is not None:
        truth = np.mean((rate_hat - np.asarray(intensity(edges), dtype=float)) ** 2, axis=0)
    return _StreamScore(
        mean_prediction=rate_hat.mean(axis=0),
        bias=(rate_hat - counts / delta).mean(axis=0),
        count_mse=((delta * rate_hat - counts) ** 2).mean(axis=0),
        truth_mse=truth,
        n_bins=edges.size,
    )


def _mean_and_se(rows: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(rows)
    if arr.shape[0] < 2:
        return arr.mean(axis=0), np.full(arr.shape[1:], np.nan)
    return arr.mean(axis=0), arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0])


def evaluate_predictor(
    pred: Predictor,
    streams: Sequence[EventStream],
    delta: float,
    intensities: Sequence[IntensityFn] | None = None,
    burn_in: float = 0.0,
    workers: int | None = None,
) -> ScoreReport:
    """
    Score ``pred`` on whole bins of width ``delta`` after ``burn_in``.

    The intensity at each bin's left edge, which uses only events before the
    bin, predicts the bin's count. ``intensities`` holds one callable per
    stream returning the true intensity at given times.
    """
    if not streams:
        raise EmptyInput("at least one stream is required")
    if not delta > 0:
        raise InvalidParameter("evaluation step must be positive", delta=delta)
    if intensities is not None and len(intensities) != len(streams):
        raise InvalidParameter("one intensity per stream is required")
    fns = list(intensities) if intensities is not None else [None] * len(streams)
    jobs = [(pred, s, float(delta), float(burn_in), f) for s, f in zip(streams, fns)]

    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1 or len(jobs) < 2:
        scores = [_score_stream(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            scores = list(pool.map(_score_stream, jobs))

    mean_pred, mean_pred_se = _mean_and_se([s.mean_prediction for s in scores])
    bias, bias_se = _mean_and_se([s.bias for s in scores])
    mse, mse_se = _mean_and_se([s.count_mse for s in scores])
    truth = truth_se = None
    if intensities is not None:
        truth, truth_se = _mean_and_se([s.truth_mse for s in scores])
    logger.info(
        "scored %s predictor on %d stream(s), delta=%g, count MSE %s",
        pred.form,
        len(streams),
        delta,
        np.array2string(mse, precision=4),
    )
    return ScoreReport(
        n_streams=len(streams),
        n_bins=int(sum(s.n_bins for s in scores)),
        delta=float(delta),
        mean_prediction=mean_pred,
        mean_prediction_se=mean_pred_se,
        bias=bias,
        bias_se=bias_se,
        count_mse=mse,
        count_mse_se=mse_se,
        truth_mse=truth,
        truth_mse_se=truth_se,
    )
