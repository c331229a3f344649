from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from pointprocess.errors import ArtifactIOError, InvalidParameter


def write_trace_csv(
    path: Path,
    times: np.ndarray,
    predicted: np.ndarray,
    truth: np.ndarray | None = None,
) -> Path:
    """
    Long-format trace with header ``t,coordinate,lambda_hat,lambda_true``.

    One row per (time, coordinate); lambda_true is left empty without a truth.
    """
    times = np.asarray(times, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if predicted.ndim != 2 or predicted.shape[0] != times.size:
        raise InvalidParameter("predicted must have shape (len(times), d)")
    if truth is not None and np.shape(truth) != predicted.shape:
        raise InvalidParameter("truth must match the predicted shape")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "coordinate", "lambda_hat", "lambda_true"])
            for n, t in enumerate(times):
                for i in range(predicted.shape[1]):
                    true_value = "" if truth is None else repr(float(truth[n, i]))
                    writer.writerow([repr(float(t)), i, repr(float(predicted[n, i])), true_value])
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e}", path=str(path)) from e
    return path
