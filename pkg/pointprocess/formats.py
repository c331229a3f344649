"""
File formats.

Streams are CSV files with a ``time,mark`` header and a JSON sidecar
``{"T": ..., "d": ...}`` next to them (``start`` is added when the window does
not begin at zero). Grids and every other artifact are canonical JSON: sorted
keys, ``repr`` floats, trailing newline, so equal objects give equal bytes.
"""
from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ArtifactIOError, ConfigError
from .grids import CovarianceGrid, KernelGrid
from .kernels import BaseKernel, build_kernel
from .streams import EventStream, validate_stream


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(obj: Any, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(obj), encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"Could not write {path}: {e}", path=str(path)) from e
    return path


def read_json(path: Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ArtifactIOError(f"Could not read {path}: {e}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ArtifactIOError(f"Malformed JSON in {path}: {e}", path=str(path)) from e


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


# ---------------------------------------------------------------------------
# Event streams
# ---------------------------------------------------------------------------


def write_stream_csv(stream: EventStream, path: Path) -> Path:
    path = Path(path)
    rows = np.column_stack([stream.times, stream.marks.astype(float)])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, rows, fmt=["%.17g", "%d"], delimiter=",", header="time,mark", comments="")
    except OSError as e:
        raise ArtifactIOError(f"Could not write {path}: {e}", path=str(path)) from e
    meta: dict[str, Any] = {"T": stream.horizon, "d": stream.dim}
    if stream.start:
        meta["start"] = stream.start
    write_json(meta, sidecar_path(path))
    return path


def read_stream(path: Path) -> EventStream:
    path = Path(path)
    meta = read_json(sidecar_path(path))
    try:
        horizon = float(meta["T"])
        dim = int(meta["d"])
        start = float(meta.get("start", 0.0))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Bad stream sidecar for {path}: {e}", path=str(path)) from e
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as e:
        raise ArtifactIOError(f"Could not read {path}: {e}", path=str(path)) from e
    except ValueError as e:
        raise ArtifactIOError(f"Malformed stream CSV {path}: {e}", path=str(path)) from e
    if rows.size == 0:
        rows = np.empty((0, 2))
    return validate_stream(rows[:, 0], rows[:, 1], horizon, dim, start=start)


# ---------------------------------------------------------------------------
# Grids and kernels
# ---------------------------------------------------------------------------


def write_kernel(kernel: BaseKernel, path: Path) -> Path:
    return write_json(kernel.to_dict(), path)


def read_kernel(path: Path) -> BaseKernel:
    return build_kernel(read_json(path))


def read_kernel_grid(path: Path) -> KernelGrid:
    kernel = read_kernel(path)
    if not isinstance(kernel, KernelGrid):
        raise ConfigError(f"{path} holds a {kernel.key} kernel, not a sampled grid")
    return kernel


def write_covariance_grid(cov: CovarianceGrid, path: Path) -> Path:
    return write_json(cov.to_dict(), path)


def read_covariance_grid(path: Path) -> CovarianceGrid:
    data = read_json(path)
    try:
        return CovarianceGrid.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Bad covariance grid in {path}: {e}", path=str(path)) from e
