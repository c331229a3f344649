from __future__ import annotations

import numpy as np

from .kernels.base import BaseKernel

# Upper bound on (event, evaluation point) pairs materialised at once.
_PAIR_CHUNK = 1 << 21


def kernel_excitation(
    kernel: BaseKernel,
    event_times: np.ndarray,
    event_marks: np.ndarray,
    eval_times: np.ndarray,
    reach: float | None = None,
) -> np.ndarray:
    """
    Sum of kernel responses to past events, shape (len(eval_times), d).

    Row n is sum over events u < eval_times[n] of K[:, mark(u)](t - u). Events
    at exactly t are excluded. Events more than ``reach`` before t are
    skipped; by default reach is the kernel's effective support.
    """
    d = kernel.dim
    event_times = np.asarray(event_times, dtype=float)
    event_marks = np.asarray(event_marks, dtype=np.int64)
    eval_times = np.asarray(eval_times, dtype=float)
    out = np.zeros((eval_times.size, d))
    if event_times.size == 0 or eval_times.size == 0:
        return out
    if reach is None:
        reach = kernel.effective_support()

    order = np.argsort(eval_times, kind="stable")
    sorted_eval = eval_times[order]
    lo = np.searchsorted(sorted_eval, event_times, side="right")
    hi = np.searchsorted(sorted_eval, event_times + reach, side="right")
    counts = hi - lo

    acc = np.zeros((eval_times.size, d))
    ends = np.cumsum(counts)
    first = 0
    while first < event_times.size:
        # Grow the chunk until it holds about _PAIR_CHUNK pairs.
        base = ends[first - 1] if first else 0
        last = int(np.searchsorted(ends, base + _PAIR_CHUNK, side="right"))
        last = max(last, first + 1)
        sl = slice(first, last)
        n_pairs = int(counts[sl].sum())
        if n_pairs:
            ev_idx = np.repeat(np.arange(first, last), counts[sl])
            offsets = np.arange(n_pairs) - np.repeat(np.cumsum(counts[sl]) - counts[sl], counts[sl])
            eval_idx = lo[ev_idx] + offsets
            lags = sorted_eval[eval_idx] - event_times[ev_idx]
            values = kernel.evaluate(lags)
            contrib = values[np.arange(n_pairs), :, event_marks[ev_idx]]
            for i in range(d):
                acc[:, i] += np.bincount(eval_idx, weights=contrib[:, i], minlength=eval_times.size)
        first = last
    out[order] = acc
    return out
