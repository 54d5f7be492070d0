import csv
import io
import math

import pytest

from norscore.annotation_io import TrialAnnotation, parse_predictions, predictions_from_timelines
from norscore.errors import ValidationError
from norscore.nor import (
    DEGENERATE,
    METRICS,
    NO_INVESTIGATIONS,
    NO_SIDE,
    NorMetrics,
    annotation_metrics,
    compare,
    me_cd_consistent,
    nor_metrics,
    parse_metrics,
    prediction_metrics,
    regression_stats,
    write_metrics,
)
from norscore.rng import SplitMix64
from norscore.synth import BoutModel, generate_trial
from norscore.timeline import TimeBase, Timeline


def T(pairs, h=1000):
    return Timeline.from_pairs(pairs, h)


def test_hand_example():
    m = nor_metrics(T([(10, 40), (100, 160)]), T([]), "left", TimeBase(30))
    assert m.n == 2
    assert m.cd == 3.0
    assert m.me == 1.5
    assert m.lf == 10 / 30
    assert m.ll == 100 / 30
    assert m.ri == 1.0


def test_ri_ratio():
    m = nor_metrics(T([(0, 90)]), T([(200, 230)]), "left", TimeBase(30))
    assert m.ri == 0.75
    m = nor_metrics(T([(0, 90)]), T([(200, 230)]), "right", TimeBase(30))
    assert m.ri == 0.25


def test_empty_track_absent_values():
    m = nor_metrics(T([]), T([]), "left")
    assert (m.n, m.cd) == (0, 0.0)
    assert m.me is None and m.lf is None and m.ll is None and m.ri is None
    assert m.reasons == {k: NO_INVESTIGATIONS for k in ("me", "lf", "ll", "ri")}


def test_cross_object_bout_counts_once():
    m = nor_metrics(T([(10, 20)]), T([(20, 30)]), "left")
    assert m.n == 1 and (m.n_left, m.n_right) == (1, 1)


def test_offset_latency():
    m = nor_metrics(T([(10, 40), (100, 160)]), T([]), "left", TimeBase(30), latency="offset")
    assert m.lf == 40 / 30 and m.ll == 160 / 30
    with pytest.raises(ValidationError):
        nor_metrics(T([]), T([]), "left", latency="middle")


def _trials(n, seed, **kw):
    rng = SplitMix64(seed)
    return [generate_trial(BoutModel(**kw), rng.next_u64(), f"v{k:02d}") for k in range(n)]


def test_me_times_n_equals_cd():
    for a in _trials(100, 61, trial_s=200):
        m = annotation_metrics(a)
        assert me_cd_consistent(m, 1e-9)
        assert m.cd_frames == sum(len(iv) for iv in a.combined)
        if m.n:
            assert m.lf <= m.ll


def test_ri_swap_symmetry():
    for a in _trials(100, 62, trial_s=200):
        m1 = annotation_metrics(a)
        flipped = TrialAnnotation(a.video_id, a.fps, a.num_frames,
                                  "right" if a.novel_side == "left" else "left", a.left, a.right)
        m2 = annotation_metrics(flipped)
        if m1.ri is not None:
            assert abs(m2.ri - (1 - m1.ri)) <= 1e-12


def test_timescale_consistency():
    for a in _trials(50, 63, trial_s=100):
        doubled = TrialAnnotation(
            a.video_id, 2 * a.fps, 2 * a.num_frames, a.novel_side,
            Timeline.from_pairs([(2 * s, 2 * e) for s, e in a.left.pairs()], 2 * a.num_frames),
            Timeline.from_pairs([(2 * s, 2 * e) for s, e in a.right.pairs()], 2 * a.num_frames),
        )
        m1, m2 = annotation_metrics(a), annotation_metrics(doubled)
        for k in METRICS:
            assert m1.get(k) == pytest.approx(m2.get(k), abs=1e-12)


def test_prediction_metrics_side_agnostic_ri_absent():
    a = generate_trial(BoutModel(trial_s=60), 1, "v")
    p = predictions_from_timelines("v", {"investigate": a.combined}, a.num_frames)
    m = prediction_metrics(p, a)
    ref = annotation_metrics(a)
    assert (m.n, m.cd, m.lf, m.ll) == (ref.n, ref.cd, ref.lf, ref.ll)
    assert m.ri is None and m.reasons["ri"] == NO_SIDE


def test_prediction_metrics_from_windows():
    a = TrialAnnotation("v", 30, 300, "left", T([(30, 90)], 300), T([(150, 180)], 300))
    labels = ["explore", "investigate_left", "investigate_left", "explore", "explore",
              "investigate_right", "explore", "explore", "explore", "explore"]
    csv_text = "video_id,window_start_frame,window_len,label\n" + "".join(
        f"v,{30 * k},30,{lab}\n" for k, lab in enumerate(labels))
    m = prediction_metrics(parse_predictions(csv_text), a)
    assert m == annotation_metrics(a)


def M(vid, **vals):
    base = dict(n=0, cd=0.0, me=None, lf=None, ll=None, ri=None)
    base.update(vals)
    return NorMetrics(vid, **base)


def test_compare_identity():
    ms = [annotation_metrics(a) for a in _trials(5, 64, trial_s=200)]
    stats = compare(ms, ms)
    for k in METRICS:
        s = stats[k]
        assert s.r_squared == 1.0 and s.mean_error == 0.0 and s.std_error == 0.0


def test_compare_negative_r2():
    s = regression_stats([1, 2, 3], [3, 3, 3])
    assert s.mean_error == 1.0
    assert s.std_error == 1.0
    assert s.r_squared == -1.5


def test_translation_100():
    rng = SplitMix64(65)
    for _ in range(100):
        n = 2 + rng.randbelow(20)
        gt = [rng.uniform(0, 100) for _ in range(n)]
        pred = [g + rng.uniform(-5, 5) for g in gt]
        c = rng.uniform(-10, 10)
        a = regression_stats(gt, pred)
        b = regression_stats(gt, [p + c for p in pred])
        assert b.mean_error == pytest.approx(a.mean_error + c, abs=1e-9)
        assert b.std_error == pytest.approx(a.std_error, abs=1e-9)


def test_compare_exclusions_and_degenerate():
    gt = [M("a", n=2, cd=3.0, me=1.5, lf=1.0, ll=2.0, ri=0.5),
          M("b", n=0),
          M("c", n=1, cd=1.0, me=1.0, lf=4.0, ll=4.0, ri=0.5)]
    pred = [M("a", n=1, cd=2.0, me=2.0, lf=1.0, ll=1.0, ri=0.5),
            M("b", n=1, cd=1.0, me=1.0, lf=2.0, ll=2.0, ri=None),
            M("c", n=1, cd=1.0, me=1.0, lf=4.0, ll=4.0, ri=0.4)]
    stats = compare(gt, pred)
    assert stats["n"].n_pairs == 3 and stats["n"].n_excluded == 0
    assert stats["lf"].n_pairs == 2 and stats["lf"].n_excluded == 1
    assert stats["ri"].r_squared is None and stats["ri"].reason == DEGENERATE
    rows = list(csv.reader(io.StringIO(stats.to_csv())))
    assert rows[0] == ["metric", "gt_mean", "r_squared", "mean_error", "std_error", "n_pairs", "n_excluded"]
    assert rows[6][2] == ""


def test_compare_too_few_pairs():
    stats = compare([M("a", n=1, cd=1.0, me=1.0, lf=0.0, ll=0.0, ri=1.0), M("b")],
                    [M("a", n=1, cd=1.0, me=1.0, lf=0.0, ll=0.0, ri=1.0), M("b")])
    assert stats["lf"].mean_error is None and stats["lf"].n_pairs == 1


def test_compare_alignment_and_permutation():
    ms = [annotation_metrics(a) for a in _trials(6, 66, trial_s=120)]
    preds = [M(m.video_id, n=m.n + 1, cd=m.cd, me=m.me, lf=m.lf, ll=m.ll, ri=m.ri) for m in ms]
    s1 = compare(ms, preds)
    s2 = compare(list(reversed(ms)), preds)
    for k in METRICS:
        assert s1[k].mean_error == pytest.approx(s2[k].mean_error)
        assert s1[k].r_squared == pytest.approx(s2[k].r_squared)
    with pytest.raises(ValidationError):
        compare(ms, preds[:-1])
    with pytest.raises(ValidationError):
        compare(ms[:2], [preds[0], preds[2]])


def test_metrics_csv_round_trip():
    ms = [annotation_metrics(a) for a in _trials(4, 67, trial_s=60)] + [M("zz")]
    text = write_metrics(ms)
    assert text.splitlines()[0] == "video_id,n,cd_s,me_s,lf_s,ll_s,ri"
    assert text.splitlines()[-1] == "zz,0,0.0,,,,"
    back = parse_metrics(text)
    for a, b in zip(sorted(ms, key=lambda m: m.video_id), back):
        for k in METRICS:
            assert a.get(k) == b.get(k)
