"""
Segmental error taxonomy
========================

Predicted and annotated tracks are compared segment by segment. Frames
that agree are TP or TN. Missed frames are Deletion, Fragmentation or
Underfill; extra frames are Insertion, Merge or Overfill.
"""

from norscore.segmental import aggregate, score, segment
from norscore.timeline import Timeline

gt = Timeline.from_pairs([(5, 15)], 20)
pred = Timeline.from_pairs([(3, 9), (11, 17)], 20)

for lab in segment(gt, pred):
    print(f"{lab.category:>14} {lab.interval}")

rep = score(gt, pred, "example")
print({c: n for c, n in rep.frames.items() if n})

# a missing event and a spurious one are the severe errors
gt2 = Timeline.from_pairs([(2, 6), (12, 16)], 20)
pred2 = Timeline.from_pairs([(2, 6), (8, 10)], 20)
rep2 = score(gt2, pred2, "severe")
print({c: n for c, n in rep2.frames.items() if n})

summary = aggregate([rep, rep2])
print("severe error rate:", summary.severe_error_rate)
