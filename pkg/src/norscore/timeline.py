"""Half-open frame intervals and normalized binary activity tracks.

A :class:`Timeline` is the canonical representation of one behavior track:
sorted, disjoint, non-adjacent ``[start, end)`` intervals inside
``[0, horizon)``. Frames are the unit everywhere; seconds only appear when a
:class:`TimeBase` converts at a reporting boundary.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import ValidationError

__all__ = [
    "FrameInterval",
    "Timeline",
    "TimeBase",
    "normalize",
    "complement",
    "union",
    "intersection",
    "total_frames",
    "events",
]


@dataclass(frozen=True, order=True, slots=True)
class FrameInterval:
    start: int
    end: int

    def __post_init__(self):
        if not isinstance(self.start, (int, np.integer)) or not isinstance(self.end, (int, np.integer)):
            raise ValidationError(f"interval bounds must be integers, got [{self.start!r},{self.end!r})")
        if self.start < 0:
            raise ValidationError(f"interval [{self.start},{self.end}) starts before frame 0")
        if self.start >= self.end:
            raise ValidationError(f"interval [{self.start},{self.end}) is empty or reversed")

    def __len__(self):
        return self.end - self.start

    def __repr__(self):
        return f"[{self.start},{self.end})"


@dataclass(frozen=True, slots=True)
class TimeBase:
    fps: int = 30

    def __post_init__(self):
        if not isinstance(self.fps, int) or isinstance(self.fps, bool) or self.fps <= 0:
            raise ValidationError(f"fps must be a positive integer, got {self.fps!r}")

    def seconds(self, frames: int) -> float:
        return float(Fraction(frames, self.fps))


def _as_interval(item) -> FrameInterval:
    if isinstance(item, FrameInterval):
        return item
    start, end = item
    return FrameInterval(int(start), int(end))


@dataclass(frozen=True, slots=True)
class Timeline:
    """Normalized interval set on ``[0, horizon)``.

    Build through :func:`normalize` (or :meth:`Timeline.from_mask`); the
    constructor only checks invariants, it does not repair them.
    """

    intervals: tuple[FrameInterval, ...]
    horizon: int

    def __post_init__(self):
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon <= 0:
            raise ValidationError(f"horizon must be a positive integer, got {self.horizon!r}")
        prev_end = -1
        for iv in self.intervals:
            if iv.end > self.horizon:
                raise ValidationError(f"interval {iv!r} lies outside [0,{self.horizon})")
            if iv.start <= prev_end:
                raise ValidationError(f"interval {iv!r} overlaps or touches its predecessor; normalize first")
            prev_end = iv.end

    @classmethod
    def empty(cls, horizon: int) -> Timeline:
        return cls((), horizon)

    @classmethod
    def from_pairs(cls, pairs: Iterable, horizon: int) -> Timeline:
        return normalize([_as_interval(p) for p in pairs], horizon)

    @classmethod
    def from_mask(cls, mask) -> Timeline:
        """Build from a boolean per-frame array; the horizon is its length."""
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 1 or mask.size == 0:
            raise ValidationError("mask must be a non-empty 1-d array")
        padded = np.concatenate(([False], mask, [False])).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        starts, ends = edges[0::2], edges[1::2]
        return cls(tuple(FrameInterval(int(s), int(e)) for s, e in zip(starts, ends)), int(mask.size))

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.horizon, dtype=bool)
        for iv in self.intervals:
            mask[iv.start:iv.end] = True
        return mask

    def pairs(self) -> list[tuple[int, int]]:
        return [(iv.start, iv.end) for iv in self.intervals]

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __contains__(self, frame) -> bool:
        i = bisect_right(self.intervals, frame, key=lambda iv: iv.start) - 1
        return i >= 0 and frame < self.intervals[i].end

    def __repr__(self):
        body = ",".join(repr(iv) for iv in self.intervals)
        return f"Timeline([{body}], horizon={self.horizon})"


def normalize(raw_intervals: Iterable, horizon: int) -> Timeline:
    """Sort, then merge overlapping and touching intervals.

    Raises :class:`ValidationError` naming the first interval that falls
    outside ``[0, horizon)``.
    """
    if not isinstance(horizon, (int, np.integer)) or horizon <= 0:
        raise ValidationError(f"horizon must be a positive integer, got {horizon!r}")
    items = [_as_interval(x) for x in raw_intervals]
    for iv in items:
        if iv.end > horizon:
            raise ValidationError(f"interval {iv!r} lies outside [0,{horizon})")
    items.sort()
    merged: list[list[int]] = []
    for iv in items:
        if merged and iv.start <= merged[-1][1]:
            if iv.end > merged[-1][1]:
                merged[-1][1] = iv.end
        else:
            merged.append([iv.start, iv.end])
    return Timeline(tuple(FrameInterval(s, e) for s, e in merged), int(horizon))


def _check_horizons(a: Timeline, b: Timeline):
    if a.horizon != b.horizon:
        raise ValidationError(f"horizon mismatch: {a.horizon} vs {b.horizon}")


def complement(t: Timeline) -> Timeline:
    out = []
    cursor = 0
    for iv in t.intervals:
        if iv.start > cursor:
            out.append(FrameInterval(cursor, iv.start))
        cursor = iv.end
    if cursor < t.horizon:
        out.append(FrameInterval(cursor, t.horizon))
    return Timeline(tuple(out), t.horizon)


def union(a: Timeline, b: Timeline) -> Timeline:
    _check_horizons(a, b)
    return normalize(a.intervals + b.intervals, a.horizon)


def intersection(a: Timeline, b: Timeline) -> Timeline:
    _check_horizons(a, b)
    out = []
    i = j = 0
    x, y = a.intervals, b.intervals
    while i < len(x) and j < len(y):
        lo = max(x[i].start, y[j].start)
        hi = min(x[i].end, y[j].end)
        if lo < hi:
            out.append(FrameInterval(lo, hi))
        if x[i].end <= y[j].end:
            i += 1
        else:
            j += 1
    return Timeline(tuple(out), a.horizon)


def total_frames(t: Timeline) -> int:
    return sum(iv.end - iv.start for iv in t.intervals)


def events(t: Timeline) -> list[FrameInterval]:
    """Maximal positive runs, in order."""
    return list(t.intervals)


def overlapping(t: Timeline, start: int, end: int) -> range:
    """Indices of intervals in ``t`` sharing at least one frame with ``[start, end)``."""
    lo = bisect_right(t.intervals, start, key=lambda iv: iv.end)
    hi = bisect_left(t.intervals, end, key=lambda iv: iv.start)
    return range(lo, hi)
