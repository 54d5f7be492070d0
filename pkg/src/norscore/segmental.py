"""Eight-way segmental error taxonomy for continuous activity recognition.

The horizon is cut at every event boundary of either track so that both
tracks are constant inside each segment. Matching frames are TP/TN. A missed
stretch of a ground-truth event is a Deletion when the event has no
prediction at all, Fragmentation when the same event is predicted on both
sides of it, and Underfill otherwise. Spurious predicted frames follow the
mirror rules: Insertion, Merge, Overfill. Two events overlap when they share
at least one frame.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from .errors import ValidationError
from .timeline import FrameInterval, Timeline

RULESET_VERSION = "1"

TP = "TP"
TN = "TN"
OVERFILL = "Overfill"
UNDERFILL = "Underfill"
FRAGMENTATION = "Fragmentation"
MERGE = "Merge"
INSERTION = "Insertion"
DELETION = "Deletion"

CATEGORIES = (TP, TN, OVERFILL, UNDERFILL, FRAGMENTATION, MERGE, INSERTION, DELETION)
ERROR_CATEGORIES = CATEGORIES[2:]
SEVERE = (INSERTION, DELETION)

# gt/pred exchange maps each category to its mirror image
SWAP = {
    TP: TP, TN: TN,
    OVERFILL: UNDERFILL, UNDERFILL: OVERFILL,
    FRAGMENTATION: MERGE, MERGE: FRAGMENTATION,
    INSERTION: DELETION, DELETION: INSERTION,
}

REPORT_HEADER = ["video_id", "category", "frames", "segments", "fraction"]
CORPUS_ID = "__corpus__"


@dataclass(frozen=True)
class SegmentLabel:
    category: str
    interval: FrameInterval


@dataclass(frozen=True)
class SegmentalReport:
    video_id: str
    horizon: int
    frames: dict
    segments: dict
    labels: tuple = field(default=(), repr=False, compare=False)

    @property
    def fractions(self) -> dict:
        return {c: self.frames[c] / self.horizon for c in CATEGORIES}

    @property
    def error_frames(self) -> int:
        return sum(self.frames[c] for c in ERROR_CATEGORIES)

    def rows(self):
        fr = self.fractions
        return [[self.video_id, c, self.frames[c], self.segments[c], repr(fr[c])] for c in CATEGORIES]


def _miss_kind(container: FrameInterval, starts, ends, a: int, b: int) -> int:
    """How the other track covers ``container`` around the uncovered segment ``[a, b)``.

    0: not at all; 1: on one side only; 2: on both sides.
    """
    lo = bisect_right(ends, container.start)
    hi = bisect_left(starts, container.end)
    if lo >= hi:
        return 0
    before = ends[lo] <= a
    after = starts[hi - 1] >= b
    return 2 if (before and after) else 1


def _enclosing(events, starts, frame):
    return events[bisect_right(starts, frame) - 1]


def segment(gt: Timeline, pred: Timeline) -> list[SegmentLabel]:
    """Label every constant segment of ``[0, horizon)``."""
    if gt.horizon != pred.horizon:
        raise ValidationError(f"horizon mismatch: gt {gt.horizon} vs pred {pred.horizon}")
    g, p = gt.intervals, pred.intervals
    g_starts = [iv.start for iv in g]
    g_ends = [iv.end for iv in g]
    p_starts = [iv.start for iv in p]
    p_ends = [iv.end for iv in p]
    cuts = sorted({0, gt.horizon, *g_starts, *g_ends, *p_starts, *p_ends})

    out = []
    gi = pi = 0
    for a, b in zip(cuts, cuts[1:]):
        while gi < len(g) and g[gi].end <= a:
            gi += 1
        while pi < len(p) and p[pi].end <= a:
            pi += 1
        g_on = gi < len(g) and g[gi].start <= a
        p_on = pi < len(p) and p[pi].start <= a
        if g_on and p_on:
            cat = TP
        elif not g_on and not p_on:
            cat = TN
        elif g_on:
            kind = _miss_kind(g[gi], p_starts, p_ends, a, b)
            cat = (DELETION, UNDERFILL, FRAGMENTATION)[kind]
        else:
            kind = _miss_kind(p[pi], g_starts, g_ends, a, b)
            cat = (INSERTION, OVERFILL, MERGE)[kind]
        out.append(SegmentLabel(cat, FrameInterval(a, b)))
    return out


def score(gt: Timeline, pred: Timeline, video_id: str = "", keep_labels: bool = False) -> SegmentalReport:
    labels = segment(gt, pred)
    frames = dict.fromkeys(CATEGORIES, 0)
    segments = dict.fromkeys(CATEGORIES, 0)
    for lab in labels:
        frames[lab.category] += lab.interval.end - lab.interval.start
        segments[lab.category] += 1
    return SegmentalReport(video_id, gt.horizon, frames, segments, tuple(labels) if keep_labels else ())


@dataclass(frozen=True)
class CorpusSummary:
    n_videos: int
    mean_fraction: dict
    total_frames: dict
    total_segments: dict
    severe_error_rate: float

    def rows(self):
        rows = [
            [CORPUS_ID, c, self.total_frames[c], self.total_segments[c], repr(self.mean_fraction[c])]
            for c in CATEGORIES
        ]
        rows.append([
            CORPUS_ID, "Severe",
            sum(self.total_frames[c] for c in SEVERE),
            sum(self.total_segments[c] for c in SEVERE),
            repr(self.severe_error_rate),
        ])
        return rows


def aggregate(reports) -> CorpusSummary:
    """Per-category mean fraction across videos plus corpus totals.

    The severe error rate is the mean over videos of the combined
    Insertion + Deletion fraction.
    """
    reports = list(reports)
    if not reports:
        raise ValidationError("cannot aggregate an empty list of reports")
    n = len(reports)
    fr = [r.fractions for r in reports]
    mean_fraction = {c: sum(f[c] for f in fr) / n for c in CATEGORIES}
    total_frames = {c: sum(r.frames[c] for r in reports) for c in CATEGORIES}
    total_segments = {c: sum(r.segments[c] for r in reports) for c in CATEGORIES}
    severe = sum(f[INSERTION] + f[DELETION] for f in fr) / n
    return CorpusSummary(n, mean_fraction, total_frames, total_segments, severe)


def write_reports(reports, summary: CorpusSummary | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in sorted(reports, key=lambda r: r.video_id):
        w.writerows(r.rows())
    if summary is not None:
        w.writerows(summary.rows())
    return buf.getvalue()
