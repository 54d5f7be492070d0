"""``nor-score`` command line: batch clip preparation, scoring and reporting.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 validation error,
4 partial failure (some videos failed; see ``errors.csv`` in the output
directory).
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from . import annotation_io as aio
from . import clip_metrics, clipper, nor, segmental, synth
from .errors import NorScoreError, ParseError, ValidationError
from .rng import SplitMix64

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_PARTIAL = 0, 1, 2, 3, 4

VERSION = f"nor-score {__version__} (segmental rule set v{segmental.RULESET_VERSION})"

CONFIG_KEYS_HELP = (
    "config keys (TOML, flat key = value): "
    "inv_min_s, inv_max_s (bout length bounds, s), gap_min_s, gap_max_s "
    "(exploration gap bounds, s), p_novel (probability a bout targets the "
    "novel object), trial_s (trial length, s), fps, novel_side (left|right)"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# -- files -------------------------------------------------------------------


def collect_inputs(specs, suffixes=(".json", ".csv")) -> list[Path]:
    """Expand directories, globs and plain files into a sorted unique list."""
    found = set()
    for spec in specs:
        p = Path(spec)
        if p.is_dir():
            found.update(q for q in p.iterdir() if q.is_file() and q.suffix in suffixes)
        elif p.is_file():
            found.add(p)
        else:
            matches = [Path(m) for m in glob.glob(spec)]
            matches = [m for m in matches if m.is_file()]
            if not matches:
                raise UsageError(f"no input files match {spec!r}")
            found.update(matches)
    if not found:
        raise UsageError(f"no input files found in {', '.join(specs)}")
    return sorted(found)


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _prepare_out(out):
    out = Path(out)
    if out.exists() and not out.is_dir():
        raise UsageError(f"output path {out} exists and is not a directory")
    return out


def _pmap(fn, items, parallel):
    items = list(items)
    if parallel <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, items))


def _guard(fn, key, *args):
    """Run ``fn``; turn package errors into a (key, kind, message) failure tuple."""
    try:
        return ("ok", key, fn(*args))
    except ParseError as exc:
        return ("parse", key, str(exc))
    except ValidationError as exc:
        return ("validation", key, str(exc))


def _read_annotation(path):
    return _guard(lambda: aio.parse_annotation(Path(path).read_bytes()), str(path))


def _read_predictions(path):
    return _guard(lambda: aio.parse_predictions(Path(path).read_bytes()), str(path))


class _Run:
    """Collects per-video failures and writes the errors report."""

    def __init__(self, out: Path):
        self.out = out
        self.failures = []

    def take(self, results):
        ok = []
        for status, key, value in results:
            if status == "ok":
                ok.append(value)
            else:
                self.failures.append((key, status, value))
        return ok

    def fail(self, key, kind, message):
        self.failures.append((key, kind, message))

    def finish(self, n_ok) -> int:
        err_path = self.out / "errors.csv"
        if not self.failures:
            if err_path.exists():
                err_path.unlink()
            return EXIT_OK
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["video_id", "error", "message"])
        for row in sorted(self.failures):
            w.writerow(row)
            print(f"error: {row[0]}: {row[2]}", file=sys.stderr)
        atomic_write(err_path, buf.getvalue())
        if n_ok:
            return EXIT_PARTIAL
        return EXIT_PARSE if any(k == "parse" for _, k, _ in self.failures) else EXIT_VALIDATION


def _unique_by_id(items, run, what):
    by_id = {}
    for item in items:
        if item.video_id in by_id:
            run.fail(item.video_id, "validation", f"duplicate {what} for video {item.video_id}")
            continue
        by_id[item.video_id] = item
    return by_id


def _apply_fps(annotations, fps):
    if fps is None:
        return annotations
    return [replace(a, fps=fps) for a in annotations]


# -- subcommands ---------------------------------------------------------------


def cmd_clips(args) -> int:
    paths = collect_inputs(args.inputs, (".json",))
    out = _prepare_out(args.out)
    run = _Run(out)
    anns = run.take(_pmap(_read_annotation, paths, args.parallel))
    anns = sorted(_unique_by_id(anns, run, "annotation").values(), key=lambda a: a.video_id)
    clips = []
    for a in anns:
        clips.extend(clipper.extract_clips(a, args.clip_len))
    if args.no_split:
        manifest = clips
    else:
        if not clips:
            run.fail("*", "validation", "no clips extracted; cannot split")
            return run.finish(0)
        manifest = clipper.split(clips, args.ratio, args.seed)
    atomic_write(out / "manifest.csv", clipper.write_manifest(manifest))
    if not args.no_split:
        print(f"{len(manifest.train)} train / {len(manifest.validation)} val clips")
    return run.finish(len(anns))


def cmd_clip_eval(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    out = _prepare_out(args.out)
    records = clip_metrics.parse_clip_eval(path.read_bytes())
    report = clip_metrics.evaluate(records)
    atomic_write(out / "clip_report.csv", report.to_csv())
    if report.curve is not None:
        atomic_write(out / "pr_curve.csv", report.curve_csv())
    print(report.table())
    return EXIT_OK


def _score_pair(item):
    gt, pred, per_side = item
    def work():
        tracks = aio.to_timelines(pred, gt.num_frames)
        if not per_side:
            return [segmental.score(gt.combined, tracks[aio.ANY], gt.video_id)]
        if aio.has_side_agnostic(pred):
            raise ValidationError("per-side scoring needs side-specific predictions")
        return [
            segmental.score(gt.left, tracks[aio.LEFT], f"{gt.video_id}:left"),
            segmental.score(gt.right, tracks[aio.RIGHT], f"{gt.video_id}:right"),
        ]
    return _guard(work, gt.video_id)


def _pair_up(gts, preds, run):
    gt_by = _unique_by_id(gts, run, "annotation")
    pred_by = _unique_by_id(preds, run, "prediction")
    for vid in sorted(set(pred_by) - set(gt_by)):
        run.fail(vid, "validation", "prediction has no matching ground truth")
    pairs = []
    for vid in sorted(gt_by):
        if vid not in pred_by:
            run.fail(vid, "validation", "ground truth has no matching prediction")
            continue
        pairs.append((gt_by[vid], pred_by[vid]))
    return pairs


def _load_pairs(args, run):
    gt_paths = collect_inputs(args.gt, (".json",))
    pred_paths = collect_inputs(args.pred)
    gts = _apply_fps(run.take(_pmap(_read_annotation, gt_paths, args.parallel)), args.fps)
    preds = run.take(_pmap(_read_predictions, pred_paths, args.parallel))
    return _pair_up(gts, preds, run)


def cmd_segscore(args) -> int:
    out = _prepare_out(args.out)
    run = _Run(out)
    pairs = _load_pairs(args, run)
    results = _pmap(_score_pair, [(g, p, args.per_side) for g, p in pairs], args.parallel)
    reports = [r for group in run.take(results) for r in group]
    summary = segmental.aggregate(reports) if reports else None
    atomic_write(out / "segmental.csv", segmental.write_reports(reports, summary))
    return run.finish(len(reports))


def _metrics_for_annotation(item):
    a, latency = item
    return _guard(nor.annotation_metrics, a.video_id, a, latency)


def _metrics_for_prediction(item):
    p, gt, latency = item
    return _guard(nor.prediction_metrics, p.video_id, p, gt, latency)


def cmd_nor(args) -> int:
    out = _prepare_out(args.out)
    run = _Run(out)
    if args.pred:
        if not args.gt:
            raise UsageError("--pred needs --gt for trial length, fps and novel side")
        pairs = _load_pairs(args, run)
        items = [(p, g, args.latency) for g, p in pairs]
        metrics = run.take(_pmap(_metrics_for_prediction, items, args.parallel))
    else:
        if not args.gt:
            raise UsageError("give annotations with --gt (and optionally predictions with --pred)")
        paths = collect_inputs(args.gt, (".json",))
        anns = _apply_fps(run.take(_pmap(_read_annotation, paths, args.parallel)), args.fps)
        anns = sorted(_unique_by_id(anns, run, "annotation").values(), key=lambda a: a.video_id)
        metrics = run.take(_pmap(_metrics_for_annotation, [(a, args.latency) for a in anns], args.parallel))
    atomic_write(out / "nor_metrics.csv", nor.write_metrics(metrics))
    return run.finish(len(metrics))


def cmd_compare(args) -> int:
    out = _prepare_out(args.out)
    run = _Run(out)
    pairs = _load_pairs(args, run)
    gt_m = run.take(_pmap(_metrics_for_annotation, [(g, args.latency) for g, _ in pairs], args.parallel))
    pred_m = run.take(_pmap(_metrics_for_prediction, [(p, g, args.latency) for g, p in pairs], args.parallel))
    common = {m.video_id for m in gt_m} & {m.video_id for m in pred_m}
    gt_m = sorted((m for m in gt_m if m.video_id in common), key=lambda m: m.video_id)
    pred_m = sorted((m for m in pred_m if m.video_id in common), key=lambda m: m.video_id)
    if not gt_m:
        run.fail("*", "validation", "no usable video pairs to compare")
        return run.finish(0)
    stats = nor.compare(gt_m, pred_m)
    atomic_write(out / "gt_metrics.csv", nor.write_metrics(gt_m))
    atomic_write(out / "pred_metrics.csv", nor.write_metrics(pred_m))
    atomic_write(out / "comparison.csv", stats.to_csv())
    return run.finish(len(gt_m))


def load_config(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _synth_one(item):
    model, seed, video_id, n_ops, k = item
    a = synth.generate_trial(model, seed, video_id)
    gt = a.combined
    primary = synth.OPERATIONS[k % len(synth.OPERATIONS)]
    spec = synth.random_spec(gt, SplitMix64(seed ^ 0x5EED), primary, extra=max(0, n_ops - 1))
    pred, ledger = synth.perturb(gt, spec)
    pset = aio.predictions_from_timelines(video_id, {aio.ANY: pred}, a.num_frames, a.fps)
    return a, pset, spec, ledger


def cmd_synth(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    model = synth.BoutModel.from_mapping(cfg)
    out = _prepare_out(args.out)
    if args.trials <= 0:
        raise UsageError("--trials must be positive")
    master = SplitMix64(args.seed)
    items = []
    for k in range(args.trials):
        items.append((model, master.next_u64(), f"synth_{args.seed}_{k:03d}", args.ops, k))
    results = _pmap(_synth_one, items, args.parallel)
    ledger_buf = io.StringIO()
    w = csv.writer(ledger_buf, lineterminator="\n")
    w.writerow(["video_id", "category", "frames"])
    spec_lines = []
    for a, pset, spec, ledger in results:
        atomic_write(out / "gt" / f"{a.video_id}.json", aio.serialize_annotation(a))
        atomic_write(out / "pred" / f"{a.video_id}.json", aio.serialize_predictions(pset))
        for c in segmental.CATEGORIES:
            w.writerow([a.video_id, c, ledger[c]])
        spec_lines.append(f"# {a.video_id}")
        spec_lines.append(synth.spec_to_text(spec))
    atomic_write(out / "ledgers.csv", ledger_buf.getvalue())
    atomic_write(out / "specs.txt", "\n".join(spec_lines) + "\n")
    return EXIT_OK


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nor-score", description="Score behavioral predictions for novel-object-recognition trials.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def common(p, out=True):
        if out:
            p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--parallel", type=int, default=1, metavar="N",
                       help="worker processes; output is identical for any N (default 1)")

    p = sub.add_parser("clips", help="cut annotations into fixed-length clips and split train/val")
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="PATH",
                   help="annotation JSON files, directories or globs")
    p.add_argument("--clip-len", type=int, default=60, help="frames per clip (default 60)")
    p.add_argument("--ratio", type=float, default=0.75, help="training fraction (default 0.75)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed (default 0)")
    p.add_argument("--no-split", action="store_true", help="emit split=none for every clip")
    common(p)
    p.set_defaults(func=cmd_clips)

    p = sub.add_parser("clip-eval", help="accuracy and precision-recall for clip predictions")
    p.add_argument("--in", dest="input", required=True, metavar="FILE",
                   help="CSV with header video_id,start_frame,true_label,pred_label,score")
    common(p)
    p.set_defaults(func=cmd_clip_eval)

    def pairs(p, gt_required=True):
        p.add_argument("--gt", nargs="+", required=gt_required, metavar="PATH", help="ground-truth annotation JSON")
        p.add_argument("--pred", nargs="+", required=gt_required, metavar="PATH",
                       help="prediction files (interval JSON or window CSV)")
        p.add_argument("--fps", type=int, default=None, help="override the annotations' frame rate")

    p = sub.add_parser("segscore", help="segmental error taxonomy per video plus corpus summary")
    pairs(p)
    p.add_argument("--per-side", action="store_true",
                   help="score left and right object tracks separately instead of the combined track")
    common(p)
    p.set_defaults(func=cmd_segscore)

    latency = dict(choices=("onset", "offset"), default="onset",
                   help="measure LF/LL to bout onsets (default) or offsets")

    p = sub.add_parser("nor", help="per-video NOR metrics (N, CD, ME, LF, LL, RI)")
    pairs(p, gt_required=False)
    p.add_argument("--latency", **latency)
    common(p)
    p.set_defaults(func=cmd_nor)

    p = sub.add_parser("compare", help="R^2 and error statistics of predicted vs annotated NOR metrics")
    pairs(p)
    p.add_argument("--latency", **latency)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="synthetic trials, perturbed predictions and expected error ledgers",
                       epilog=CONFIG_KEYS_HELP)
    p.add_argument("--trials", type=int, default=5, help="number of trials (default 5)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--ops", type=int, default=3, help="perturbation operations per trial (default 3)")
    p.add_argument("--config", metavar="FILE", help="TOML bout-model config; see keys below")
    common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if getattr(args, "parallel", 1) < 1:
        print("nor-score: error: --parallel must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nor-score: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"nor-score: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, NorScoreError) as exc:
        print(f"nor-score: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
