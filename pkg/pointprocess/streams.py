from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParameter,
    MarkOutOfRange,
    NonIncreasingTimes,
    TimeOutOfWindow,
)


@dataclass(frozen=True, eq=False)
class EventStream:
    """
    Sorted event times with integer marks on the window [start, horizon).

    Instances are immutable; the arrays are marked read-only on construction.
    Use validate_stream() to build one from untrusted input.
    """

    times: np.ndarray
    marks: np.ndarray
    horizon: float
    dim: int
    start: float = 0.0

    def __post_init__(self) -> None:
        times = np.ascontiguousarray(self.times, dtype=float)
        marks = np.ascontiguousarray(self.marks, dtype=np.int64)
        times.setflags(write=False)
        marks.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "dim", int(self.dim))

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.horizon == other.horizon
            and self.start == other.start
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.marks, other.marks)
        )

    @property
    def duration(self) -> float:
        return self.horizon - self.start

    def counts_per_mark(self) -> np.ndarray:
        return np.bincount(self.marks, minlength=self.dim).astype(np.int64)

    def shifted(self, offset: float) -> EventStream:
        return EventStream(
            times=self.times + offset,
            marks=self.marks,
            horizon=self.horizon + offset,
            dim=self.dim,
            start=self.start + offset,
        )

    def reversed(self) -> EventStream:
        """
        Time reversal t -> start + horizon - t.

        The reflected window is half-open on the other side, so an event
        exactly at start would land on the horizon; such events are dropped.
        """
        mirrored = (self.start + self.horizon) - self.times[::-1]
        marks = self.marks[::-1]
        keep = mirrored < self.horizon
        return EventStream(
            times=mirrored[keep],
            marks=marks[keep],
            horizon=self.horizon,
            dim=self.dim,
            start=self.start,
        )

    def restrict(self, start: float, end: float) -> EventStream:
        if not (self.start <= start < end <= self.horizon):
            raise InvalidParameter(
                "restriction window must lie inside the observation window",
                start=start,
                end=end,
                window=[self.start, self.horizon],
            )
        keep = (self.times >= start) & (self.times < end)
        return EventStream(
            times=self.times[keep],
            marks=self.marks[keep],
            horizon=end,
            dim=self.dim,
            start=start,
        )


def validate_stream(
    times: Sequence[float] | np.ndarray,
    marks: Sequence[int] | np.ndarray,
    horizon: float,
    dim: int,
    start: float = 0.0,
) -> EventStream:
    """
    Check raw event data and return an EventStream.

    Raises:
        NonIncreasingTimes: duplicate or out-of-order times
        MarkOutOfRange: a mark outside {0, ..., dim-1}
        TimeOutOfWindow: a time outside [start, horizon)
    """
    t = np.asarray(times, dtype=float).reshape(-1)
    m_raw = np.asarray(marks).reshape(-1)

    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise InvalidParameter("dimension must be a positive integer", dim=dim)
    if not (math.isfinite(horizon) and math.isfinite(start) and horizon > start):
        raise InvalidParameter(
            "observation window must be finite and non-empty",
            start=start,
            horizon=horizon,
        )
    if t.size != m_raw.size:
        raise InvalidParameter(
            "times and marks differ in length", times=int(t.size), marks=int(m_raw.size)
        )
    if m_raw.size and not np.all(np.equal(np.mod(m_raw, 1), 0)):
        raise MarkOutOfRange("marks must be integers")
    m = m_raw.astype(np.int64)

    if t.size:
        if not np.all(np.isfinite(t)):
            raise TimeOutOfWindow("event times must be finite")
        steps = np.diff(t)
        bad = np.flatnonzero(steps <= 0)
        if bad.size:
            i = int(bad[0])
            raise NonIncreasingTimes(
                "event times must be strictly increasing",
                index=i + 1,
                previous=float(t[i]),
                time=float(t[i + 1]),
            )
        bad = np.flatnonzero((m < 0) | (m >= dim))
        if bad.size:
            i = int(bad[0])
            raise MarkOutOfRange(
                f"mark {int(m[i])} outside 0..{dim - 1}", index=i, mark=int(m[i]), dim=dim
            )
        if t[0] < start or t[-1] >= horizon:
            i = 0 if t[0] < start else int(t.size - 1)
            raise TimeOutOfWindow(
                "event time outside [start, horizon)",
                index=i,
                time=float(t[i]),
                window=[float(start), float(horizon)],
            )

    return EventStream(times=t, marks=m, horizon=horizon, dim=int(dim), start=start)


def bin_counts(stream: EventStream, delta: float) -> np.ndarray:
    """
    Counts per bin and mark, shape (ceil(duration / delta), dim).

    Bin b covers [start + b*delta, start + (b+1)*delta).
    """
    if not (delta > 0 and math.isfinite(delta)):
        raise InvalidParameter("bin width must be positive", delta=delta)
    n_bins = max(1, int(math.ceil(stream.duration / delta)))
    out = np.zeros((n_bins, stream.dim), dtype=np.int64)
    if len(stream):
        bins = np.floor((stream.times - stream.start) / delta).astype(np.int64)
        np.clip(bins, 0, n_bins - 1, out=bins)
        np.add.at(out, (bins, stream.marks), 1)
    return out
