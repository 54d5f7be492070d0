"""Seeded synthetic trials and prediction perturbations with known error counts.

:func:`generate_trial` draws alternating exploration gaps and investigation
bouts. :func:`perturb` edits a ground-truth track into a prediction with
operations that each produce one kind of segmental error, and returns the
exact per-category frame counts the scorer must report for the result.
Parameters that would make an operation's effect ambiguous (events merging,
out-of-range frames, edges straddling a ground-truth boundary) raise
:class:`ValidationError` instead of being clamped.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .annotation_io import TrialAnnotation
from .errors import ValidationError
from .rng import SplitMix64
from .segmental import (
    CATEGORIES,
    DELETION,
    FRAGMENTATION,
    INSERTION,
    MERGE,
    OVERFILL,
    TN,
    TP,
    UNDERFILL,
)
from .timeline import FrameInterval, Timeline, normalize, overlapping, total_frames


@dataclass(frozen=True)
class BoutModel:
    """Uniform bout/gap durations in seconds; ``p_novel`` is the chance a bout targets the novel object."""

    inv_min_s: float = 0.2
    inv_max_s: float = 3.0
    gap_min_s: float = 1.0
    gap_max_s: float = 20.0
    p_novel: float = 0.5
    trial_s: float = 330.0
    fps: int = 30
    novel_side: str = "left"

    def __post_init__(self):
        for name in ("inv_min_s", "inv_max_s", "gap_min_s", "gap_max_s", "trial_s"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.inv_min_s > self.inv_max_s or self.gap_min_s > self.gap_max_s:
            raise ValidationError("distribution lower bound exceeds upper bound")
        if not self.trial_s > self.inv_max_s:
            raise ValidationError("trial must be longer than the longest bout")
        if not 0.0 <= self.p_novel <= 1.0:
            raise ValidationError("p_novel must lie in [0, 1]")
        if not isinstance(self.fps, int) or self.fps <= 0:
            raise ValidationError("fps must be a positive integer")
        if self.novel_side not in ("left", "right"):
            raise ValidationError("novel_side must be 'left' or 'right'")

    @property
    def num_frames(self) -> int:
        return max(1, round(self.trial_s * self.fps))

    def frame_bounds(self, lo_s, hi_s):
        lo = max(1, math.ceil(lo_s * self.fps))
        hi = max(lo, math.floor(hi_s * self.fps))
        return lo, hi

    @classmethod
    def from_mapping(cls, cfg: dict) -> BoutModel:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ValidationError(f"unknown bout model keys: {unknown}")
        return cls(**cfg)

    def to_mapping(self) -> dict:
        return asdict(self)


def _draw_frames(rng, model, lo_s, hi_s):
    lo, hi = model.frame_bounds(lo_s, hi_s)
    return min(hi, max(lo, round(rng.uniform(lo_s, hi_s) * model.fps)))


def generate_trial(model: BoutModel, seed: int, video_id: str | None = None) -> TrialAnnotation:
    """Exploration gap, bout, gap, bout, ... until the trial ends.

    A bout that would run past the last frame is dropped, so every bout has
    its full sampled length.
    """
    rng = SplitMix64(seed)
    horizon = model.num_frames
    familiar = "right" if model.novel_side == "left" else "left"
    sides = {"left": [], "right": []}
    t = 0
    while True:
        t += _draw_frames(rng, model, model.gap_min_s, model.gap_max_s)
        if t >= horizon:
            break
        dur = _draw_frames(rng, model, model.inv_min_s, model.inv_max_s)
        side = model.novel_side if rng.random() < model.p_novel else familiar
        if t + dur > horizon:
            break
        sides[side].append(FrameInterval(t, t + dur))
        t += dur
    if video_id is None:
        video_id = f"synth-{seed}"
    return TrialAnnotation(
        video_id, model.fps, horizon, model.novel_side,
        normalize(sides["left"], horizon), normalize(sides["right"], horizon),
    )


# -- perturbations -------------------------------------------------------


@dataclass(frozen=True)
class Dilate:
    d: int


@dataclass(frozen=True)
class Erode:
    d: int


@dataclass(frozen=True)
class DeleteEvent:
    index: int


@dataclass(frozen=True)
class InsertEvent:
    position: int
    length: int


@dataclass(frozen=True)
class PunchHole:
    event: int
    offset: int
    length: int


@dataclass(frozen=True)
class BridgeGap:
    gap: int


OPERATIONS = (Dilate, Erode, DeleteEvent, InsertEvent, PunchHole, BridgeGap)


@dataclass(frozen=True)
class PerturbationSpec:
    ops: tuple = ()

    def __iter__(self):
        return iter(self.ops)


@dataclass(frozen=True)
class ErrorLedger:
    frames: dict
    horizon: int

    def __post_init__(self):
        if sum(self.frames.values()) != self.horizon:
            raise AssertionError("ledger does not partition the horizon")

    def __getitem__(self, category):
        return self.frames[category]


class _Perturber:
    def __init__(self, gt: Timeline):
        self.gt = gt
        self.h = gt.horizon
        self.pred = gt
        self.counts = dict.fromkeys(CATEGORIES, 0)
        self.counts[TP] = total_frames(gt)
        self.counts[TN] = self.h - self.counts[TP]

    # frame-set queries against the fixed ground truth
    def gt_hits(self, a, b):
        return len(overlapping(self.gt, a, b)) > 0

    def gt_event_at(self, frame):
        r = overlapping(self.gt, frame, frame + 1)
        return self.gt.intervals[r.start] if len(r) else None

    def pred_hits(self, a, b):
        return a < b and len(overlapping(self.pred, a, b)) > 0

    def move(self, src, dst, n):
        self.counts[src] -= n
        self.counts[dst] += n

    def _event(self, index):
        if not 0 <= index < len(self.pred):
            raise ValidationError(f"no predicted event {index} (have {len(self.pred)})")
        return self.pred.intervals[index]

    def apply(self, op):
        getattr(self, "_" + type(op).__name__.lower())(op)

    def _set(self, ivs):
        self.pred = Timeline(tuple(ivs), self.h)

    def _dilate(self, op):
        d = op.d
        if d <= 0:
            raise ValidationError("dilation must be at least one frame")
        ev = self.pred.intervals
        for i, p in enumerate(ev):
            if p.start - d < 0 or p.end + d > self.h:
                raise ValidationError(f"dilating {p!r} by {d} leaves the trial")
            if self.gt_hits(p.start - d, p.start) or self.gt_hits(p.end, p.end + d):
                raise ValidationError(f"dilating {p!r} by {d} reaches ground-truth frames")
            if i + 1 < len(ev) and ev[i + 1].start - p.end <= 2 * d:
                raise ValidationError(f"dilating by {d} would join {p!r} and {ev[i + 1]!r}")
        for p in ev:
            cat = OVERFILL if self.gt_hits(p.start, p.end) else INSERTION
            self.move(TN, cat, 2 * d)
        self._set(FrameInterval(p.start - d, p.end + d) for p in ev)

    def _erode(self, op):
        d = op.d
        if d <= 0:
            raise ValidationError("erosion must be at least one frame")
        ev = self.pred.intervals
        moves = []
        for p in ev:
            if len(p) <= 2 * d:
                raise ValidationError(f"eroding {p!r} by {d} would remove it")
            has_gt = self.gt_hits(p.start, p.end)
            for a, b, inner in ((p.start, p.start + d, p.start + d), (p.end - d, p.end, p.end - d - 1)):
                if not self.gt_hits(a, b):
                    moves.append((OVERFILL if has_gt else INSERTION, TN, d))
                    continue
                e = self.gt_event_at(a)
                if e is None or b > e.end or not e.start <= inner < e.end:
                    raise ValidationError(f"erosion edge [{a},{b}) of {p!r} straddles a ground-truth boundary")
                if a == p.start:
                    covered = self.pred_hits(e.start, p.start)
                else:
                    covered = self.pred_hits(p.end, e.end)
                moves.append((TP, FRAGMENTATION if covered else UNDERFILL, d))
        for src, dst, n in moves:
            self.move(src, dst, n)
        self._set(FrameInterval(p.start + d, p.end - d) for p in ev)

    def _deleteevent(self, op):
        p = self._event(op.index)
        if not self.gt_hits(p.start, p.end):
            self.move(INSERTION, TN, len(p))
        elif self.gt_event_at(p.start) == p:
            self.move(TP, DELETION, len(p))
        else:
            raise ValidationError(f"event {p!r} neither matches a ground-truth event nor avoids all of them")
        self._set(q for q in self.pred.intervals if q != p)

    def _insertevent(self, op):
        a, b = op.position, op.position + op.length
        if op.length <= 0 or a < 0 or b > self.h:
            raise ValidationError(f"inserted event [{a},{b}) is empty or outside the trial")
        if self.gt_hits(a, b):
            raise ValidationError(f"inserted event [{a},{b}) overlaps ground truth")
        if self.pred_hits(max(0, a - 1), min(self.h, b + 1)):
            raise ValidationError(f"inserted event [{a},{b}) touches a predicted event")
        self.move(TN, INSERTION, op.length)
        self._set(sorted(self.pred.intervals + (FrameInterval(a, b),)))

    def _punchhole(self, op):
        p = self._event(op.event)
        a, b = p.start + op.offset, p.start + op.offset + op.length
        if op.offset < 1 or op.length < 1 or b >= p.end:
            raise ValidationError(f"hole [{a},{b}) is not interior to {p!r}")
        e = self.gt_event_at(a - 1)
        if e is None or not (e.start < a and b < e.end):
            raise ValidationError(f"hole [{a},{b}) is not interior to a ground-truth event")
        self.move(TP, FRAGMENTATION, op.length)
        rest = [q for q in self.pred.intervals if q != p]
        self._set(sorted(rest + [FrameInterval(p.start, a), FrameInterval(b, p.end)]))

    def _bridgegap(self, op):
        ev = self.pred.intervals
        if not 0 <= op.gap < len(ev) - 1:
            raise ValidationError(f"no gap {op.gap} between predicted events")
        left, right = ev[op.gap], ev[op.gap + 1]
        if self.gt_hits(left.end, right.start):
            raise ValidationError("bridged gap contains ground-truth frames")
        if self.gt_event_at(left.end - 1) is None or self.gt_event_at(right.start) is None:
            raise ValidationError("bridged events must end and start on ground-truth frames")
        self.move(TN, MERGE, right.start - left.end)
        merged = FrameInterval(left.start, right.end)
        self._set(ev[:op.gap] + (merged,) + ev[op.gap + 2:])


def perturb(gt: Timeline, spec) -> tuple[Timeline, ErrorLedger]:
    """Apply ``spec`` (a :class:`PerturbationSpec` or iterable of ops) in order."""
    state = _Perturber(gt)
    for op in spec:
        state.apply(op)
    return state.pred, ErrorLedger(dict(state.counts), gt.horizon)


def _propose(kind, pred: Timeline, rng: SplitMix64):
    h = pred.horizon
    n = len(pred)
    if kind is Dilate or kind is Erode:
        return kind(rng.randint(1, 5))
    if kind is InsertEvent:
        return InsertEvent(rng.randbelow(h), rng.randint(1, min(20, h)))
    if n == 0:
        return None
    if kind is DeleteEvent:
        return DeleteEvent(rng.randbelow(n))
    if kind is BridgeGap:
        return BridgeGap(rng.randbelow(n - 1)) if n > 1 else None
    idx = rng.randbelow(n)
    size = len(pred.intervals[idx])
    if size < 3:
        return None
    offset = rng.randint(1, size - 2)
    return PunchHole(idx, offset, rng.randint(1, size - offset - 1))


def random_spec(gt: Timeline, rng: SplitMix64, primary=None, extra: int = 2, attempts: int = 200) -> PerturbationSpec:
    """Draw a valid composed spec, optionally starting with one ``primary`` op type.

    Candidate operations are proposed at random and kept only if they apply
    cleanly on top of the ones already chosen. Returns fewer ops than asked
    when no valid candidate turns up within ``attempts`` tries.
    """
    chosen = []
    state = _Perturber(gt)
    wanted = ([primary] if primary is not None else []) + [None] * extra
    for kind in wanted:
        for _ in range(attempts):
            k = kind if kind is not None else OPERATIONS[rng.randbelow(len(OPERATIONS))]
            op = _propose(k, state.pred, rng)
            if op is None:
                continue
            trial = _Perturber(gt)
            try:
                for prev in chosen + [op]:
                    trial.apply(prev)
            except ValidationError:
                continue
            chosen.append(op)
            state = trial
            break
    return PerturbationSpec(tuple(chosen))


def spec_to_text(spec) -> str:
    """One op per line, e.g. ``PunchHole event=2 offset=5 length=3``."""
    lines = []
    for op in spec:
        args = " ".join(f"{k}={v}" for k, v in asdict(op).items())
        lines.append(f"{type(op).__name__} {args}")
    return "\n".join(lines)

