"""Reading and writing trial annotations and model predictions.

Annotation JSON::

    {"video_id": "v01", "fps": 30, "num_frames": 9900, "novel_side": "left",
     "intervals": [{"label": "investigate_left", "start_frame": 150, "end_frame": 240}]}

Predictions come either as the same JSON shape (labels may also be the
side-agnostic ``investigate``, each interval may carry a ``score``) or as a
window CSV with header ``video_id,window_start_frame,window_len,label,score``
where the score column is optional.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .timeline import FrameInterval, Timeline, TimeBase, intersection, normalize, union

LEFT = "investigate_left"
RIGHT = "investigate_right"
ANY = "investigate"
EXPLORE = "explore"

ANNOTATION_LABELS = (LEFT, RIGHT)
INTERVAL_PREDICTION_LABELS = (LEFT, RIGHT, ANY)
WINDOW_LABELS = (EXPLORE, LEFT, RIGHT, ANY)
SIDES = ("left", "right")

WINDOW_HEADER = ["video_id", "window_start_frame", "window_len", "label", "score"]


@dataclass(frozen=True)
class TrialAnnotation:
    video_id: str
    fps: int
    num_frames: int
    novel_side: str
    left: Timeline
    right: Timeline

    def __post_init__(self):
        TimeBase(self.fps)
        if self.novel_side not in SIDES:
            raise ValidationError(f"novel_side must be 'left' or 'right', got {self.novel_side!r}")
        for t in (self.left, self.right):
            if t.horizon != self.num_frames:
                raise ValidationError("per-object timelines must span num_frames")
        if len(intersection(self.left, self.right)):
            raise ValidationError(f"{self.video_id}: overlapping object labels")

    @property
    def timebase(self) -> TimeBase:
        return TimeBase(self.fps)

    @property
    def novel(self) -> Timeline:
        return self.left if self.novel_side == "left" else self.right

    @property
    def familiar(self) -> Timeline:
        return self.right if self.novel_side == "left" else self.left

    @property
    def combined(self) -> Timeline:
        return union(self.left, self.right)


@dataclass(frozen=True)
class PredictionInterval:
    label: str
    interval: FrameInterval
    score: float | None = None


@dataclass(frozen=True)
class WindowRecord:
    start: int
    length: int
    label: str
    score: float | None = None

    @property
    def end(self):
        return self.start + self.length


@dataclass(frozen=True)
class PredictionSet:
    video_id: str
    mode: str
    entries: tuple = ()
    num_frames: int | None = None
    fps: int | None = None

    @property
    def scored(self) -> bool:
        return bool(self.entries) and self.entries[0].score is not None

    @property
    def horizon(self) -> int:
        if self.num_frames is not None:
            return self.num_frames
        if self.mode == "windows":
            return self.entries[-1].end if self.entries else 0
        return max((e.interval.end for e in self.entries), default=0)


# -- helpers ---------------------------------------------------------------


def _decode(data) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from None
    return data


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None


def _int_field(obj, key, where, required=True):
    if key not in obj:
        if required:
            raise ParseError(f"{where}: missing field", field=key)
        return None
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected integer, got {value!r}", field=key)
    return value


def _str_field(obj, key, where, required=True):
    if key not in obj:
        if required:
            raise ParseError(f"{where}: missing field", field=key)
        return None
    value = obj[key]
    if not isinstance(value, str):
        raise ParseError(f"{where}: expected string, got {value!r}", field=key)
    return value


def _score(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: score must be a number, got {value!r}", field="score")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{where}: score {value!r} outside [0,1]")
    return value


def _interval(start, end, horizon, where):
    if start >= end:
        raise ValidationError(f"{where}: empty or reversed interval [{start},{end})")
    if start < 0 or (horizon is not None and end > horizon):
        raise ValidationError(f"{where}: interval [{start},{end}) outside [0,{horizon})")
    return FrameInterval(start, end)


def _check_disjoint(tracks: dict, video_id):
    labels = sorted(tracks)
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            if len(intersection(tracks[a], tracks[b])):
                raise ValidationError(f"{video_id}: overlapping object labels ({a} and {b})")


# -- annotations -----------------------------------------------------------


def parse_annotation(data) -> TrialAnnotation:
    doc = _load_json(_decode(data))
    if not isinstance(doc, dict):
        raise ParseError("annotation must be a JSON object")
    video_id = _str_field(doc, "video_id", "annotation")
    fps = _int_field(doc, "fps", video_id)
    num_frames = _int_field(doc, "num_frames", video_id)
    novel_side = _str_field(doc, "novel_side", video_id)
    if fps <= 0:
        raise ValidationError(f"{video_id}: fps must be positive")
    if num_frames <= 0:
        raise ValidationError(f"{video_id}: num_frames must be positive")
    if novel_side not in SIDES:
        raise ValidationError(f"{video_id}: novel_side must be 'left' or 'right', got {novel_side!r}")
    raw = doc.get("intervals")
    if not isinstance(raw, list):
        raise ParseError(f"{video_id}: expected a list", field="intervals")
    buckets = {LEFT: [], RIGHT: []}
    for k, item in enumerate(raw):
        where = f"{video_id} intervals[{k}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object", field="intervals")
        label = _str_field(item, "label", where)
        if label not in buckets:
            raise ValidationError(f"{where}: unknown label {label!r}")
        start = _int_field(item, "start_frame", where)
        end = _int_field(item, "end_frame", where)
        buckets[label].append(_interval(start, end, num_frames, where))
    left = normalize(buckets[LEFT], num_frames)
    right = normalize(buckets[RIGHT], num_frames)
    _check_disjoint({LEFT: left, RIGHT: right}, video_id)
    return TrialAnnotation(video_id, fps, num_frames, novel_side, left, right)


def annotation_to_dict(a: TrialAnnotation) -> dict:
    rows = [(iv.start, LEFT, iv.end) for iv in a.left] + [(iv.start, RIGHT, iv.end) for iv in a.right]
    rows.sort()
    return {
        "video_id": a.video_id,
        "fps": a.fps,
        "num_frames": a.num_frames,
        "novel_side": a.novel_side,
        "intervals": [{"label": lab, "start_frame": s, "end_frame": e} for s, lab, e in rows],
    }


def serialize_annotation(a: TrialAnnotation) -> str:
    return json.dumps(annotation_to_dict(a), indent=1) + "\n"


# -- predictions -----------------------------------------------------------


def parse_predictions(data, fmt=None) -> PredictionSet:
    """Parse interval JSON or window CSV; ``fmt`` is sniffed when omitted."""
    text = _decode(data)
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        return _parse_interval_json(text)
    if fmt == "csv":
        return _parse_window_csv(text)
    raise ValueError(f"unknown prediction format {fmt!r}")


def _parse_interval_json(text) -> PredictionSet:
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise ParseError("prediction file must be a JSON object")
    video_id = _str_field(doc, "video_id", "predictions")
    num_frames = _int_field(doc, "num_frames", video_id, required=False)
    fps = _int_field(doc, "fps", video_id, required=False)
    if num_frames is not None and num_frames <= 0:
        raise ValidationError(f"{video_id}: num_frames must be positive")
    raw = doc.get("intervals")
    if not isinstance(raw, list):
        raise ParseError(f"{video_id}: expected a list", field="intervals")
    entries = []
    for k, item in enumerate(raw):
        where = f"{video_id} intervals[{k}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object", field="intervals")
        label = _str_field(item, "label", where)
        if label not in INTERVAL_PREDICTION_LABELS:
            raise ValidationError(f"{where}: unknown label {label!r}")
        start = _int_field(item, "start_frame", where)
        end = _int_field(item, "end_frame", where)
        score = _score(item["score"], where) if "score" in item else None
        entries.append(PredictionInterval(label, _interval(start, end, num_frames, where), score))
    _check_scores(entries, video_id)
    entries.sort(key=lambda e: (e.interval.start, e.interval.end, e.label))
    pset = PredictionSet(video_id, "intervals", tuple(entries), num_frames, fps)
    if entries:
        _check_disjoint(_raw_tracks(pset, pset.horizon), video_id)
    return pset


def _parse_window_csv(text) -> PredictionSet:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty prediction CSV", line=1) from None
    header = [h.strip() for h in header]
    if header not in (WINDOW_HEADER, WINDOW_HEADER[:-1]):
        raise ParseError(f"unexpected header {','.join(header)!r}", line=1)
    has_score_col = len(header) == 5
    video_ids = set()
    windows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", line=lineno)
        video_ids.add(row[0])
        try:
            start = int(row[1])
        except ValueError:
            raise ParseError(f"not an integer: {row[1]!r}", line=lineno, field="window_start_frame") from None
        try:
            length = int(row[2])
        except ValueError:
            raise ParseError(f"not an integer: {row[2]!r}", line=lineno, field="window_len") from None
        label = row[3]
        if label not in WINDOW_LABELS:
            raise ValidationError(f"line {lineno}: unknown label {label!r}")
        score = None
        if has_score_col and row[4].strip():
            try:
                score = float(row[4])
            except ValueError:
                raise ParseError(f"not a number: {row[4]!r}", line=lineno, field="score") from None
            score = _score(score, f"line {lineno}")
        if length <= 0 or start < 0:
            raise ValidationError(f"line {lineno}: invalid window start {start} len {length}")
        windows.append(WindowRecord(start, length, label, score))
    if len(video_ids) > 1:
        raise ValidationError(f"prediction CSV mixes video ids: {sorted(video_ids)}")
    if not windows:
        raise ValidationError("prediction CSV has no windows")
    video_id = video_ids.pop()
    _check_scores(windows, video_id)
    windows.sort(key=lambda w: w.start)
    cursor = 0
    for w in windows:
        if w.start < cursor:
            raise ValidationError(f"{video_id}: overlapping windows at frame {w.start}")
        if w.start > cursor:
            raise ValidationError(f"{video_id}: windows leave frames [{cursor},{w.start}) uncovered")
        cursor = w.end
    return PredictionSet(video_id, "windows", tuple(windows))


def _check_scores(entries, video_id):
    flags = {e.score is not None for e in entries}
    if len(flags) > 1:
        raise ValidationError(f"{video_id}: score present on some entries but not all")


def _raw_tracks(p: PredictionSet, horizon: int) -> dict:
    buckets = {LEFT: [], RIGHT: [], ANY: []}
    for e in p.entries:
        if p.mode == "windows":
            if e.label == EXPLORE:
                continue
            if e.start >= horizon:
                raise ValidationError(f"{p.video_id}: window at frame {e.start} starts past the trial end {horizon}")
            buckets[e.label].append(FrameInterval(e.start, min(e.end, horizon)))
        else:
            if e.interval.end > horizon:
                raise ValidationError(f"{p.video_id}: interval {e.interval!r} outside [0,{horizon})")
            buckets[e.label].append(e.interval)
    return {label: normalize(ivs, horizon) for label, ivs in buckets.items()}


def to_timelines(source, num_frames: int | None = None) -> dict[str, Timeline]:
    """Per-label tracks plus the combined ``investigate`` track.

    For a :class:`PredictionSet`, ``num_frames`` (usually taken from the
    matching ground truth) fixes the horizon; a trailing window that runs
    past it is clamped. Keys are ``investigate_left``, ``investigate_right``
    and ``investigate``; side-agnostic predictions only feed the latter.
    """
    if isinstance(source, TrialAnnotation):
        return {LEFT: source.left, RIGHT: source.right, ANY: source.combined}
    horizon = num_frames if num_frames is not None else source.horizon
    if horizon <= 0:
        raise ValidationError(f"{source.video_id}: cannot infer a trial length from an empty prediction set")
    tracks = _raw_tracks(source, horizon)
    side_agnostic = tracks[ANY]
    combined = union(union(tracks[LEFT], tracks[RIGHT]), side_agnostic)
    return {LEFT: tracks[LEFT], RIGHT: tracks[RIGHT], ANY: combined}


def side_agnostic_track(p: PredictionSet, num_frames: int | None = None) -> Timeline:
    """Frames predicted as ``investigate`` with no object attached."""
    horizon = num_frames if num_frames is not None else p.horizon
    return _raw_tracks(p, horizon)[ANY]


def has_side_agnostic(p: PredictionSet) -> bool:
    return any(e.label == ANY for e in p.entries)


def predictions_to_dict(p: PredictionSet) -> dict:
    doc = {"video_id": p.video_id}
    if p.fps is not None:
        doc["fps"] = p.fps
    if p.num_frames is not None:
        doc["num_frames"] = p.num_frames
    rows = []
    for e in p.entries:
        row = {"label": e.label, "start_frame": e.interval.start, "end_frame": e.interval.end}
        if e.score is not None:
            row["score"] = e.score
        rows.append(row)
    doc["intervals"] = rows
    return doc


def serialize_predictions(p: PredictionSet) -> str:
    if p.mode == "intervals":
        return json.dumps(predictions_to_dict(p), indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    scored = p.scored
    writer.writerow(WINDOW_HEADER if scored else WINDOW_HEADER[:-1])
    for w in p.entries:
        row = [p.video_id, w.start, w.length, w.label]
        if scored:
            row.append(repr(w.score))
        writer.writerow(row)
    return buf.getvalue()


def predictions_from_timelines(video_id, tracks: dict, num_frames=None, fps=None) -> PredictionSet:
    """Interval-mode prediction set from label -> Timeline (unscored)."""
    entries = [
        PredictionInterval(label, iv)
        for label in INTERVAL_PREDICTION_LABELS
        for iv in tracks.get(label, ())
    ]
    entries.sort(key=lambda e: (e.interval.start, e.interval.end, e.label))
    return PredictionSet(video_id, "intervals", tuple(entries), num_frames, fps)


def windows_from_labels(video_id, labels, window_len, scores=None) -> PredictionSet:
    """Window-mode prediction set from one label per consecutive window."""
    entries = []
    for k, label in enumerate(labels):
        if label not in WINDOW_LABELS:
            raise ValidationError(f"unknown label {label!r}")
        score = None if scores is None else float(scores[k])
        entries.append(WindowRecord(k * window_len, window_len, label, score))
    return PredictionSet(video_id, "windows", tuple(entries))
