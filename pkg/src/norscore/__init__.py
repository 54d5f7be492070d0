"""Evaluation toolkit for continuous behavior recognition in novel-object-recognition trials."""

__version__ = "0.1.0"

from .errors import NorScoreError, ParseError, ValidationError
from .timeline import (
    FrameInterval,
    TimeBase,
    Timeline,
    complement,
    events,
    intersection,
    normalize,
    total_frames,
    union,
)
from .annotation_io import (
    PredictionSet,
    TrialAnnotation,
    parse_annotation,
    parse_predictions,
    serialize_annotation,
    serialize_predictions,
    to_timelines,
)
from .clipper import ClipRecord, SplitAssignment, extract_clips, split
from .clip_metrics import ClipEvalRecord, PrCurve, accuracy, pr_curve
from .segmental import SegmentalReport, aggregate, score
from .nor import ComparisonStats, NorMetrics, compare, nor_metrics
from .synth import BoutModel, ErrorLedger, PerturbationSpec, generate_trial, perturb
from .rng import SplitMix64
