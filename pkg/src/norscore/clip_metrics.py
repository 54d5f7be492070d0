"""Clip-level accuracy and precision-recall with ``investigate`` as positive."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

CLASSES = ("explore", "investigate")
POSITIVE = "investigate"
EVAL_HEADER = ["video_id", "start_frame", "true_label", "pred_label", "score"]


@dataclass(frozen=True)
class ClipEvalRecord:
    true_label: str
    predicted_label: str
    score: float | None = None
    video_id: str = ""
    start_frame: int = 0

    def __post_init__(self):
        for lab in (self.true_label, self.predicted_label):
            if lab not in CLASSES:
                raise ValidationError(f"unknown clip label {lab!r}")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score {self.score!r} outside [0,1]")


@dataclass(frozen=True)
class PrCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    ap: float

    @property
    def points(self):
        return list(zip(self.thresholds.tolist(), self.precision.tolist(), self.recall.tolist()))


def accuracy(records) -> float:
    records = list(records)
    if not records:
        raise ValidationError("accuracy of an empty batch is undefined")
    correct = sum(r.true_label == r.predicted_label for r in records)
    return correct / len(records)


def _scores_and_targets(records, positive):
    records = list(records)
    if not records:
        raise ValidationError("empty batch")
    if any(r.score is None for r in records):
        raise ValidationError("PR curve needs a score on every record")
    scores = np.array([r.score for r in records], dtype=float)
    if positive != POSITIVE:
        scores = 1.0 - scores
    targets = np.array([r.true_label == positive for r in records], dtype=bool)
    return scores, targets


def pr_curve_from_arrays(scores, targets) -> PrCurve:
    """Step-integrated PR curve; equal scores form a single threshold."""
    scores = np.asarray(scores, dtype=float)
    targets = np.asarray(targets, dtype=bool)
    n_pos = int(targets.sum())
    if n_pos == 0:
        raise ValidationError("AP undefined: no positive records")
    if n_pos == targets.size:
        raise ValidationError("PR curve needs at least one negative record")
    order = np.argsort(-scores, kind="stable")
    s, t = scores[order], targets[order]
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(t)[last]
    predicted = last + 1
    precision = tp / predicted
    recall = tp / n_pos
    ap = float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
    return PrCurve(s[last], precision, recall, ap)


def pr_curve(records, positive: str = POSITIVE) -> PrCurve:
    scores, targets = _scores_and_targets(records, positive)
    return pr_curve_from_arrays(scores, targets)


def per_class_ap(records) -> dict[str, float]:
    """AP for each class taken as positive; explore uses ``1 - score``."""
    return {c: pr_curve(records, positive=c).ap for c in CLASSES}


def parse_clip_eval(data) -> list[ClipEvalRecord]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    if header not in (EVAL_HEADER, EVAL_HEADER[:-1]):
        raise ParseError(f"unexpected header {','.join(header)!r}", line=1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", line=lineno)
        try:
            start = int(row[1])
        except ValueError:
            raise ParseError(f"not an integer: {row[1]!r}", line=lineno, field="start_frame") from None
        score = None
        if len(row) == 5 and row[4].strip():
            try:
                score = float(row[4])
            except ValueError:
                raise ParseError(f"not a number: {row[4]!r}", line=lineno, field="score") from None
        out.append(ClipEvalRecord(row[2], row[3], score, row[0], start))
    if len({r.score is None for r in out}) > 1:
        raise ValidationError("score present on some records but not all")
    return out


@dataclass(frozen=True)
class ClipReport:
    n_records: int
    accuracy: float
    ap: dict
    curve: PrCurve | None

    def rows(self):
        rows = [["n_records", self.n_records], ["accuracy", repr(self.accuracy)]]
        for c in CLASSES:
            if c in self.ap:
                rows.append([f"ap_{c}", repr(self.ap[c])])
        if self.ap:
            rows.append(["mean_class_ap", repr(float(np.mean(list(self.ap.values()))))])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        w.writerows(self.rows())
        return buf.getvalue()

    def curve_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["threshold", "precision", "recall"])
        if self.curve is not None:
            for th, p, r in self.curve.points:
                w.writerow([repr(th), repr(p), repr(r)])
        return buf.getvalue()

    def table(self) -> str:
        lines = [f"{'metric':<16}{'value':>10}"]
        for name, value in self.rows():
            lines.append(f"{name:<16}{float(value):>10.4f}" if name != "n_records" else f"{name:<16}{value:>10}")
        return "\n".join(lines)


def evaluate(records) -> ClipReport:
    """Accuracy always; PR curve and per-class AP when the batch is scored."""
    records = list(records)
    acc = accuracy(records)
    if records[0].score is None:
        return ClipReport(len(records), acc, {}, None)
    return ClipReport(len(records), acc, per_class_ap(records), pr_curve(records))
