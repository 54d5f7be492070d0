"""Fixed-length training clips from annotated intervals, and the seeded split."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .annotation_io import TrialAnnotation
from .errors import ValidationError
from .rng import SplitMix64
from .timeline import complement

EXPLORE = "explore"
INVESTIGATE = "investigate"

MANIFEST_HEADER = ["video_id", "class", "start_frame", "length", "split"]


@dataclass(frozen=True)
class ClipRecord:
    video_id: str
    class_label: str
    start_frame: int
    length: int

    @property
    def end_frame(self):
        return self.start_frame + self.length


@dataclass(frozen=True)
class SplitAssignment:
    train: list
    validation: list
    seed: int
    ratio: float


def _fragment(video_id, label, track, clip_len):
    out = []
    for iv in track:
        for k in range(len(iv) // clip_len):
            out.append(ClipRecord(video_id, label, iv.start + k * clip_len, clip_len))
    return out


def extract_clips(a: TrialAnnotation, clip_len: int = 60) -> list[ClipRecord]:
    """Cut every investigation and exploration run into ``clip_len`` pieces.

    Pieces are anchored at the run start; runs shorter than ``clip_len``
    contribute nothing and the tail remainder of longer runs is dropped.
    Investigation runs are taken from the combined (either-object) track,
    exploration runs from its complement. Output is sorted by start frame.
    """
    if clip_len <= 0:
        raise ValidationError(f"clip_len must be positive, got {clip_len}")
    investigate = a.combined
    clips = _fragment(a.video_id, INVESTIGATE, investigate, clip_len)
    clips += _fragment(a.video_id, EXPLORE, complement(investigate), clip_len)
    clips.sort(key=lambda c: c.start_frame)
    return clips


def train_size(n: int, ratio) -> int:
    # Fraction(str(.)) keeps decimal ratios exact: floor(0.29 * 100) must be 29
    return math.floor(Fraction(str(ratio)) * n)


def split(manifest, ratio: float = 0.75, seed: int = 0) -> SplitAssignment:
    """Seeded Fisher-Yates shuffle, then a prefix of ``floor(ratio * n)`` for training."""
    if not 0 < ratio < 1:
        raise ValidationError(f"ratio must lie in (0, 1), got {ratio}")
    records = list(manifest)
    if not records:
        raise ValidationError("cannot split an empty manifest")
    SplitMix64(seed).shuffle(records)
    k = train_size(len(records), ratio)
    return SplitAssignment(records[:k], records[k:], seed, ratio)


def manifest_rows(assignment_or_clips):
    """Rows for the manifest CSV, ordered by (video_id, start_frame)."""
    if isinstance(assignment_or_clips, SplitAssignment):
        tagged = [(c, "train") for c in assignment_or_clips.train]
        tagged += [(c, "val") for c in assignment_or_clips.validation]
    else:
        tagged = [(c, "none") for c in assignment_or_clips]
    tagged.sort(key=lambda t: (t[0].video_id, t[0].start_frame))
    return [[c.video_id, c.class_label, c.start_frame, c.length, s] for c, s in tagged]


def write_manifest(assignment_or_clips) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MANIFEST_HEADER)
    w.writerows(manifest_rows(assignment_or_clips))
    return buf.getvalue()
