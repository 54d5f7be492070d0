import csv
import io
import math

import numpy as np
import pytest

from norscore.errors import ValidationError
from norscore.rng import SplitMix64
from norscore.segmental import (
    CATEGORIES,
    ERROR_CATEGORIES,
    SWAP,
    aggregate,
    score,
    segment,
    write_reports,
)
from norscore.synth import BoutModel, generate_trial
from norscore.timeline import Timeline, complement

from oracles import all_masks, brute_counts, counts_dict, random_timeline


def T(pairs, h):
    return Timeline.from_pairs(pairs, h)


def nonzero(report):
    return {c: v for c, v in report.frames.items() if v}


# hand-enumerated segment by segment
WORKED = [
    ([(5, 15)], [(3, 9), (11, 17)], 20, {"TP": 8, "TN": 6, "Overfill": 4, "Fragmentation": 2}),
    ([(5, 10)], [], 20, {"Deletion": 5, "TN": 15}),
    ([(2, 5), (8, 11)], [(2, 11)], 15, {"TP": 6, "Merge": 3, "TN": 6}),
    ([(5, 15)], [(8, 12)], 20, {"TP": 4, "Underfill": 6, "TN": 10}),
]


@pytest.mark.parametrize("gt,pred,h,expected", WORKED)
def test_worked_examples(gt, pred, h, expected):
    assert nonzero(score(T(gt, h), T(pred, h))) == expected


def test_first_example_segments():
    labels = segment(T([(5, 15)], 20), T([(3, 9), (11, 17)], 20))
    assert [(l.category, l.interval.start, l.interval.end) for l in labels] == [
        ("TN", 0, 3), ("Overfill", 3, 5), ("TP", 5, 9), ("Fragmentation", 9, 11),
        ("TP", 11, 15), ("Overfill", 15, 17), ("TN", 17, 20),
    ]


def test_insertion_and_identity():
    r = score(T([], 20), T([(3, 6)], 20))
    assert nonzero(r) == {"Insertion": 3, "TN": 17}
    g = T([(1, 4), (9, 15)], 20)
    r = score(g, g)
    assert r.error_frames == 0 and r.frames["TP"] == 9


def test_merge_rule_precedence():
    # the gap between two gt events is Merge even though the same pred event also underfills
    r = score(T([(2, 6), (10, 14)], 20), T([(4, 12)], 20))
    assert nonzero(r) == {"TP": 4, "Merge": 4, "Underfill": 4, "TN": 8}


def test_horizon_mismatch():
    with pytest.raises(ValidationError):
        score(Timeline.empty(5), Timeline.empty(6))


def test_fractions_and_segments():
    r = score(T([(5, 15)], 20), T([(3, 9), (11, 17)], 20), "v")
    assert math.isclose(sum(r.fractions.values()), 1.0, abs_tol=1e-12)
    assert r.segments["Overfill"] == 2 and r.segments["TN"] == 2 and r.segments["Fragmentation"] == 1


@pytest.mark.parametrize("h", range(1, 8))
def test_exhaustive_small_horizons(h):
    masks = all_masks(h)
    tls = [Timeline.from_mask(m) for m in masks]
    n = len(masks)
    gi, pi = (a.ravel() for a in np.meshgrid(np.arange(n), np.arange(n), indexing="ij"))
    expected = brute_counts(masks[gi], masks[pi])
    for k, (g, p) in enumerate(zip(gi, pi)):
        r = score(tls[g], tls[p])
        assert [r.frames[c] for c in CATEGORIES] == expected[k].tolist()
        assert sum(r.frames.values()) == h


def _seeded_pairs(n, h, seed):
    rng = SplitMix64(seed)
    for _ in range(n):
        yield random_timeline(rng, h, max_events=12), random_timeline(rng, h, max_events=12)


def test_swap_symmetry_500():
    for g, p in _seeded_pairs(500, 300, 51):
        a, b = score(g, p), score(p, g)
        for c in CATEGORIES:
            assert a.frames[c] == b.frames[SWAP[c]]
            assert a.segments[c] == b.segments[SWAP[c]]


def test_dilation_adds_two_d_overfill():
    rng = SplitMix64(52)
    checked = 0
    for g, p in _seeded_pairs(300, 400, 53):
        base = score(g, p)
        d = rng.randint(1, 4)
        iv = p.intervals
        ok = all(x.start - d >= 0 and x.end + d <= p.horizon for x in iv)
        ok = ok and all(b.start - a.end > 2 * d for a, b in zip(iv, iv[1:]))
        # dilation margins must avoid gt frames and the pred events must already overlap gt
        ok = ok and all(
            not g.to_mask()[x.start - d:x.start].any() and not g.to_mask()[x.end:x.end + d].any()
            and g.to_mask()[x.start:x.end].any()
            for x in iv
        )
        if not ok:
            continue
        dilated = Timeline.from_pairs([(x.start - d, x.end + d) for x in iv], p.horizon)
        after = score(g, dilated)
        delta = {c: after.frames[c] - base.frames[c] for c in CATEGORIES}
        assert delta["Overfill"] == 2 * d * len(iv)
        assert delta["TN"] == -2 * d * len(iv)
        assert all(delta[c] == 0 for c in CATEGORIES if c not in ("Overfill", "TN"))
        checked += 1
    # also from the identity, where every pred event overlaps gt by construction
    for seed in range(100):
        g = generate_trial(BoutModel(trial_s=60), seed).combined
        iv = g.intervals
        if not iv or iv[0].start < 3 or iv[-1].end > g.horizon - 3:
            continue
        if any(b.start - a.end <= 6 for a, b in zip(iv, iv[1:])):
            continue
        dilated = Timeline.from_pairs([(x.start - 3, x.end + 3) for x in iv], g.horizon)
        r = score(g, dilated)
        assert r.frames["Overfill"] == 6 * len(iv)
        assert r.error_frames == r.frames["Overfill"]
        checked += 1
    assert checked > 50


def test_complement_prediction_has_no_matches():
    for g, _ in _seeded_pairs(200, 100, 55):
        if not len(g) or len(g) == 1 and len(g.intervals[0]) == g.horizon:
            continue
        r = score(g, complement(g))
        assert r.frames["TP"] == 0 and r.frames["TN"] == 0


def test_large_horizon_partition():
    for g, p in _seeded_pairs(10, 100_000, 56):
        r = score(g, p)
        assert sum(r.frames.values()) == 100_000
        assert counts_dict(brute_counts(g.to_mask(), p.to_mask())[0]) == r.frames


def test_aggregate():
    r1 = score(T([(5, 10)], 100), T([(5, 10), (50, 52)], 100), "a")  # 2 insertion frames
    r2 = score(T([(5, 10), (20, 24)], 100), T([(5, 10)], 100), "b")  # 4 deletion frames
    s = aggregate([r1, r2])
    assert math.isclose(s.severe_error_rate, 0.03)
    assert s.total_frames["TP"] == 10
    one = aggregate([r1])
    assert one.mean_fraction == r1.fractions


def test_aggregate_additivity_100():
    rng = SplitMix64(57)
    for _ in range(100):
        reports = [score(g, p) for g, p in _seeded_pairs(1 + rng.randbelow(5), 200, rng.next_u64())]
        s = aggregate(reports)
        for c in CATEGORIES:
            assert s.total_frames[c] == sum(r.frames[c] for r in reports)
            assert s.total_segments[c] == sum(r.segments[c] for r in reports)


def test_aggregate_empty():
    with pytest.raises(ValidationError):
        aggregate([])


def test_report_csv():
    reports = [score(T([(5, 15)], 20), T([(3, 9), (11, 17)], 20), "b"),
               score(T([(5, 10)], 20), T([], 20), "a")]
    rows = list(csv.reader(io.StringIO(write_reports(reports, aggregate(reports)))))
    assert rows[0] == ["video_id", "category", "frames", "segments", "fraction"]
    assert rows[1][0] == "a" and rows[9][0] == "b"
    corpus = [r for r in rows if r[0] == "__corpus__"]
    assert [r[1] for r in corpus] == list(CATEGORIES) + ["Severe"]
    assert float(corpus[-1][4]) == 0.125


def test_error_category_constants():
    assert len(CATEGORIES) == 8 and set(ERROR_CATEGORIES) | {"TP", "TN"} == set(CATEGORIES)
    assert all(SWAP[SWAP[c]] == c for c in CATEGORIES)
