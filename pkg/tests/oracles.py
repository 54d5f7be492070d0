"""Independent reference implementations used only by the tests.

Everything here works frame by frame on boolean arrays, never through the
interval sweep the package uses, so agreement is meaningful.
"""

import numpy as np

from norscore.rng import SplitMix64
from norscore.segmental import CATEGORIES
from norscore.timeline import FrameInterval, Timeline, normalize

TP, TN, O, U, F, M, I, D = range(8)


def all_masks(h):
    """Every boolean mask of length ``h``, one per row (2**h rows)."""
    return ((np.arange(1 << h)[:, None] >> np.arange(h)) & 1).astype(bool)


def _runs_context(X, Y):
    """For each frame inside a run of X: count of Y-frames in the same X-run before / after it."""
    n, h = X.shape
    idx = np.broadcast_to(np.arange(h), (n, h))
    prev = np.zeros_like(X)
    prev[:, 1:] = X[:, :-1]
    nxt = np.zeros_like(X)
    nxt[:, :-1] = X[:, 1:]
    run_start = X & ~prev
    run_end = X & ~nxt
    start_idx = np.maximum.accumulate(np.where(run_start, idx, 0), axis=1)
    end_idx = np.minimum.accumulate(np.where(run_end, idx, h - 1)[:, ::-1], axis=1)[:, ::-1]
    both = (X & Y).astype(np.int32)
    incl = np.cumsum(both, axis=1)
    excl = incl - both
    rows = np.arange(n)[:, None]
    before = excl - excl[rows, start_idx]
    after = incl[rows, end_idx] - incl
    return before, after


def classify_frames(G, P):
    """Per-frame category codes for a batch of (gt, pred) mask rows."""
    G = np.atleast_2d(np.asarray(G, dtype=bool))
    P = np.atleast_2d(np.asarray(P, dtype=bool))
    out = np.full(G.shape, -1, dtype=np.int8)
    out[G & P] = TP
    out[~G & ~P] = TN

    before, after = _runs_context(G, P)
    miss = G & ~P
    none = (before == 0) & (after == 0)
    out[miss & none] = D
    out[miss & ~none & (before > 0) & (after > 0)] = F
    out[miss & ~none & ~((before > 0) & (after > 0))] = U

    before, after = _runs_context(P, G)
    extra = P & ~G
    none = (before == 0) & (after == 0)
    out[extra & none] = I
    out[extra & ~none & (before > 0) & (after > 0)] = M
    out[extra & ~none & ~((before > 0) & (after > 0))] = O
    assert (out >= 0).all()
    return out


def brute_counts(G, P):
    """Frame counts per category, shape (batch, 8)."""
    codes = classify_frames(G, P)
    return np.stack([(codes == k).sum(axis=1) for k in range(8)], axis=1)


def counts_dict(row):
    return {c: int(v) for c, v in zip(CATEGORIES, row)}


def random_timeline(rng: SplitMix64, horizon, max_events=None, max_len=None):
    """Random normalized timeline built from random raw intervals."""
    k = rng.randint(0, max_events if max_events is not None else max(1, horizon // 8))
    max_len = max_len or max(1, horizon // 4)
    raw = []
    for _ in range(k):
        s = rng.randbelow(horizon)
        e = min(horizon, s + rng.randint(1, max_len))
        raw.append(FrameInterval(s, e))
    return normalize(raw, horizon)


def fast_block_mask(seed, horizon, mean_run):
    """Blocky mask of length ``horizon`` from geometric run lengths (numpy RNG, test-only)."""
    gen = np.random.default_rng(seed)
    runs = gen.geometric(1.0 / mean_run, size=2 * horizon // mean_run + 10)
    edges = np.cumsum(runs)
    edges = edges[edges < horizon]
    flips = np.zeros(horizon, dtype=np.int8)
    flips[edges] = 1
    return (np.cumsum(flips) + gen.integers(2)) % 2 == 1


def exhaustive_ap(scores, targets):
    """AP by scanning every candidate threshold and counting directly.

    For each distinct score t (descending) the predicted-positive set is
    {score >= t}; precision and recall come from explicit counts, and the
    recall increments weight the precision at each threshold.
    """
    scores = list(map(float, scores))
    targets = list(map(bool, targets))
    n_pos = sum(targets)
    ap = 0.0
    prev_recall = 0.0
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, targets) if s >= t and y)
        pp = sum(1 for s in scores if s >= t)
        recall = tp / n_pos
        ap += (recall - prev_recall) * (tp / pp)
        prev_recall = recall
    return ap


def mask_of(t: Timeline):
    m = np.zeros(t.horizon, dtype=bool)
    for iv in t.intervals:
        m[iv.start:iv.end] = True
    return m
