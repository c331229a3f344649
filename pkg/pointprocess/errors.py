"""
Error taxonomy shared by every package.

Each error carries a machine-readable ``code``, the process exit code the
command line maps it to, and a ``details`` dict that ends up in the JSON
error record written to stderr.
"""
from __future__ import annotations

from typing import Any

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class PointProcessError(Exception):
    code = "point_process_error"
    exit_code = EXIT_NUMERIC

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.code,
            "message": self.message,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


# ---------------------------------------------------------------------------
# Input validation (exit code 2)
# ---------------------------------------------------------------------------


class InvalidStream(PointProcessError):
    code = "invalid_stream"
    exit_code = EXIT_CONFIG


class NonIncreasingTimes(InvalidStream):
    code = "non_increasing_times"


class MarkOutOfRange(InvalidStream):
    code = "mark_out_of_range"


class TimeOutOfWindow(InvalidStream):
    code = "time_out_of_window"


class InvalidParameter(PointProcessError):
    code = "invalid_parameter"
    exit_code = EXIT_CONFIG


class NegativeRate(InvalidParameter):
    code = "negative_rate"


class NonPositiveRate(InvalidParameter):
    code = "non_positive_rate"


class EmptyInput(InvalidParameter):
    code = "empty_input"


class GridTooCoarse(InvalidParameter):
    code = "grid_too_coarse"


class GridOutOfRange(InvalidParameter):
    code = "grid_out_of_range"


class ConfigError(InvalidParameter):
    code = "config_error"


# ---------------------------------------------------------------------------
# Numerical failures (exit code 3)
# ---------------------------------------------------------------------------


class UnstableKernel(PointProcessError):
    code = "unstable_kernel"
    exit_code = EXIT_NUMERIC


class SingularSystem(PointProcessError):
    code = "singular_system"


class SingularErrorMatrix(PointProcessError):
    code = "singular_error_matrix"


class SingularV(PointProcessError):
    code = "singular_v"


class NumericOverflow(PointProcessError):
    code = "numeric_overflow"


class SolverDisagreement(PointProcessError):
    code = "solver_disagreement"


# ---------------------------------------------------------------------------
# Artifact I/O (exit code 4)
# ---------------------------------------------------------------------------


class ArtifactIOError(PointProcessError):
    code = "artifact_io_error"
    exit_code = EXIT_IO
