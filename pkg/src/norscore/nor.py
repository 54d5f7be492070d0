"""Novel-object-recognition trial metrics and predicted-vs-annotated agreement.

Per trial: number of investigations (N), cumulative duration (CD), mean
duration (ME), latency to first and last investigation (LF, LL) and the
recognition index (RI, novel share of total investigation time). Metrics
that cannot be computed are ``None`` with a reason, never zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .annotation_io import (
    LEFT,
    RIGHT,
    PredictionSet,
    TrialAnnotation,
    has_side_agnostic,
    side_agnostic_track,
    to_timelines,
)
from .errors import ValidationError
from .timeline import Timeline, TimeBase, total_frames, union

METRICS = ("n", "cd", "me", "lf", "ll", "ri")
METRICS_HEADER = ["video_id", "n", "cd_s", "me_s", "lf_s", "ll_s", "ri"]
COMPARISON_HEADER = ["metric", "gt_mean", "r_squared", "mean_error", "std_error", "n_pairs", "n_excluded"]

NO_INVESTIGATIONS = "no investigations"
NO_SIDE = "side-agnostic predictions"
DEGENERATE = "degenerate target variance"
TOO_FEW = "fewer than 2 usable pairs"


@dataclass(frozen=True)
class NorMetrics:
    video_id: str
    n: int
    cd: float
    me: float | None
    lf: float | None
    ll: float | None
    ri: float | None
    cd_frames: int = 0
    n_left: int = 0
    n_right: int = 0
    reasons: dict = field(default_factory=dict, compare=False)

    def get(self, metric):
        return getattr(self, metric)

    def row(self):
        def cell(v):
            return "" if v is None else repr(float(v))
        return [self.video_id, self.n, cell(self.cd), cell(self.me), cell(self.lf), cell(self.ll), cell(self.ri)]


def nor_metrics(
    left: Timeline,
    right: Timeline,
    novel_side: str,
    timebase: TimeBase = TimeBase(),
    video_id: str = "",
    latency: str = "onset",
    side_agnostic: Timeline | None = None,
) -> NorMetrics:
    """Metrics from per-object tracks.

    Investigations are the maximal runs of the combined track, so a bout
    that moves straight from one object to the other counts once.
    ``side_agnostic`` holds predicted investigation frames with no object
    attached; they count toward N/CD/ME/LF/LL but make RI unavailable.
    ``latency`` picks bout onsets (default) or offsets for LF and LL.
    """
    if latency not in ("onset", "offset"):
        raise ValidationError(f"latency must be 'onset' or 'offset', got {latency!r}")
    if novel_side not in ("left", "right"):
        raise ValidationError(f"novel_side must be 'left' or 'right', got {novel_side!r}")
    combined = union(left, right)
    if side_agnostic is not None:
        combined = union(combined, side_agnostic)
    bouts = combined.intervals
    n = len(bouts)
    cd_frames = total_frames(combined)
    sec = timebase.seconds
    reasons = {}
    if n == 0:
        me = lf = ll = ri = None
        for m in ("me", "lf", "ll", "ri"):
            reasons[m] = NO_INVESTIGATIONS
    else:
        me = float(cd_frames / timebase.fps / n)
        edge = (lambda iv: iv.start) if latency == "onset" else (lambda iv: iv.end)
        lf = sec(edge(bouts[0]))
        ll = sec(edge(bouts[-1]))
        novel, familiar = (left, right) if novel_side == "left" else (right, left)
        if side_agnostic is not None and len(side_agnostic):
            ri = None
            reasons["ri"] = NO_SIDE
        else:
            nov = total_frames(novel)
            ri = nov / (nov + total_frames(familiar))
    return NorMetrics(
        video_id, n, sec(cd_frames), me, lf, ll, ri,
        cd_frames=cd_frames, n_left=len(left), n_right=len(right), reasons=reasons,
    )


def annotation_metrics(a: TrialAnnotation, latency: str = "onset") -> NorMetrics:
    return nor_metrics(a.left, a.right, a.novel_side, a.timebase, a.video_id, latency)


def prediction_metrics(p: PredictionSet, gt: TrialAnnotation, latency: str = "onset") -> NorMetrics:
    """Metrics for a prediction set, borrowing trial length, fps and novel side from ``gt``."""
    tracks = to_timelines(p, gt.num_frames)
    agnostic = side_agnostic_track(p, gt.num_frames) if has_side_agnostic(p) else None
    return nor_metrics(tracks[LEFT], tracks[RIGHT], gt.novel_side, gt.timebase, p.video_id, latency, agnostic)


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    gt_mean: float | None
    r_squared: float | None
    mean_error: float | None
    std_error: float | None
    n_pairs: int
    n_excluded: int
    reason: str | None = None

    def row(self):
        def cell(v):
            return "" if v is None else repr(float(v))
        return [self.metric, cell(self.gt_mean), cell(self.r_squared), cell(self.mean_error),
                cell(self.std_error), self.n_pairs, self.n_excluded]


@dataclass(frozen=True)
class ComparisonStats:
    metrics: dict

    def __getitem__(self, metric) -> MetricComparison:
        return self.metrics[metric]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COMPARISON_HEADER)
        for m in METRICS:
            w.writerow(self.metrics[m].row())
        return buf.getvalue()


def regression_stats(gt, pred, metric="", n_excluded=0) -> MetricComparison:
    """R^2 with ground truth as target, and mean/sample-std of pred - gt."""
    gt = np.asarray(gt, dtype=float)
    pred = np.asarray(pred, dtype=float)
    n = gt.size
    if n < 2:
        gt_mean = float(gt.mean()) if n else None
        return MetricComparison(metric, gt_mean, None, None, None, n, n_excluded, TOO_FEW)
    err = pred - gt
    gt_mean = float(gt.mean())
    ss_tot = float(np.sum((gt - gt_mean) ** 2))
    ss_res = float(np.sum(err ** 2))
    reason = None
    if ss_tot == 0.0:
        r2 = None
        reason = DEGENERATE
    else:
        r2 = 1.0 - ss_res / ss_tot
    return MetricComparison(
        metric, gt_mean, r2, float(err.mean()), float(err.std(ddof=1)), n, n_excluded, reason,
    )


def compare(gt_metrics, pred_metrics) -> ComparisonStats:
    """Pair trials by video_id and summarize each metric's prediction error.

    Trials where a metric is absent on either side are left out of that
    metric only and tallied in ``n_excluded``.
    """
    gt_metrics, pred_metrics = list(gt_metrics), list(pred_metrics)
    if len(gt_metrics) != len(pred_metrics):
        raise ValidationError(f"{len(gt_metrics)} ground-truth trials but {len(pred_metrics)} predicted")
    gt_ids = [m.video_id for m in gt_metrics]
    if gt_ids == [m.video_id for m in pred_metrics]:
        pairs = list(zip(gt_metrics, pred_metrics))
    else:
        gt_by = {m.video_id: m for m in gt_metrics}
        pred_by = {m.video_id: m for m in pred_metrics}
        if len(gt_by) != len(gt_metrics) or len(pred_by) != len(pred_metrics):
            raise ValidationError("duplicate video_id in metric lists")
        if gt_by.keys() != pred_by.keys():
            missing = sorted(gt_by.keys() ^ pred_by.keys())
            raise ValidationError(f"ground truth and predictions cover different videos: {missing}")
        pairs = [(gt_by[v], pred_by[v]) for v in sorted(gt_by)]
    out = {}
    for metric in METRICS:
        g, p = [], []
        excluded = 0
        for gm, pm in pairs:
            a, b = gm.get(metric), pm.get(metric)
            if a is None or b is None:
                excluded += 1
                continue
            g.append(a)
            p.append(b)
        out[metric] = regression_stats(g, p, metric, excluded)
    return ComparisonStats(out)


def write_metrics(metrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for m in sorted(metrics, key=lambda m: m.video_id):
        w.writerow(m.row())
    return buf.getvalue()


def parse_metrics(data) -> list[NorMetrics]:
    """Read a metrics CSV back; empty cells become absent values."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != METRICS_HEADER:
        raise ValidationError("unexpected metrics header")
    out = []
    for r in rows[1:]:
        if not r:
            continue
        vals = [None if c == "" else float(c) for c in r[2:]]
        out.append(NorMetrics(r[0], int(r[1]), *vals))
    return out


def me_cd_consistent(m: NorMetrics, tol=1e-9) -> bool:
    """``me * n == cd`` up to ``tol`` seconds (vacuous when n is 0)."""
    return m.n == 0 or math.isclose(m.me * m.n, m.cd, abs_tol=tol)
