"""
Frame timelines
===============

Annotations are sets of half-open frame intervals ``[start, end)``.
A Timeline keeps them sorted and disjoint, and touching intervals merge.
"""

import numpy as np

from norscore.timeline import FrameInterval, Timeline, complement, intersection, normalize, union

# raw intervals from an annotator, out of order and touching
raw = [FrameInterval(40, 60), FrameInterval(10, 25), FrameInterval(25, 30)]
left = normalize(raw, horizon=100)
print("left:", left.pairs())

right = Timeline.from_pairs([(50, 70)], 100)
print("union:", union(left, right).pairs())
print("intersection:", intersection(left, right).pairs())
print("exploration (complement of union):", complement(union(left, right)).pairs())

# round trip through a boolean mask
mask = left.to_mask()
print("frames investigated:", int(mask.sum()), "==", sum(len(iv) for iv in left))
assert Timeline.from_mask(mask) == left

# intervals must lie inside the horizon
try:
    normalize([FrameInterval(90, 120)], 100)
except ValueError as exc:
    print("rejected:", exc)
