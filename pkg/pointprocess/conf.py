from __future__ import annotations

import os
from pathlib import Path
from typing import Any

# Same root as the project settings when django is not configured.
_BASE_DIR = Path(__file__).resolve().parent.parent

_DEFAULTS: dict[str, Any] = {
    "BLP_OUTPUT_DIR": str(_BASE_DIR / "runs"),
    "BLP_WORKERS": 1,
    "BLP_ORACLE_NODES": 2**20,
    "BLP_ORACLE_CUTOFF": 50.0,
    "BLP_RIDGE_SCALE": 1e-8,
    "BLP_BOOTSTRAP_RESAMPLES": 200,
    "BLP_BENCH_REPEATS": 5,
    "BLP_RECORD_RUNS": True,
}


def _coerce(raw: str, default: Any) -> Any:
    if isinstance(default, bool):
        return raw.lower() == "true"
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def get_setting(name: str, default: Any = None) -> Any:
    """
    Read a tunable from django settings, falling back to the environment.

    The numeric packages are usable without a configured django project, so
    a missing or unconfigured settings module is not an error.
    """
    fallback = _DEFAULTS.get(name, default)
    try:
        from django.conf import settings  # type: ignore

        if settings.configured and hasattr(settings, name):
            return getattr(settings, name)
    except Exception:
        pass
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return _coerce(raw, fallback) if fallback is not None else raw


def output_dir() -> Path:
    return Path(get_setting("BLP_OUTPUT_DIR"))


def worker_count() -> int:
    return max(1, int(get_setting("BLP_WORKERS")))


