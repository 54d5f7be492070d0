"""
NOR trial metrics and agreement
===============================

For one trial: number of investigations N, cumulative duration CD, mean
duration ME, latency to first and last investigation LF/LL, and the
recognition index RI (novel share of investigation time). Across trials
the predicted metrics are compared with the annotated ones via R^2 and the
mean and standard deviation of the error.
"""

from norscore.nor import annotation_metrics, compare, nor_metrics, regression_stats
from norscore.synth import BoutModel, generate_trial
from norscore.timeline import TimeBase, Timeline

left = Timeline.from_pairs([(10, 40), (100, 160)], 300)
right = Timeline.empty(300)
m = nor_metrics(left, right, "left", TimeBase(30))
print(f"N={m.n} CD={m.cd}s ME={m.me}s LF={m.lf:.3f}s LL={m.ll:.3f}s RI={m.ri}")

trials = [generate_trial(BoutModel(p_novel=0.7), seed, f"t{seed}") for seed in range(10)]
gt = [annotation_metrics(t) for t in trials]
print("mean N over 10 synthetic trials:", sum(x.n for x in gt) / len(gt))

stats = compare(gt, gt)
print(stats.to_csv())

# R^2 is relative to the spread of the annotated values and can go negative
print("R^2 for [1,2,3] vs [3,3,3]:", regression_stats([1, 2, 3], [3, 3, 3]).r_squared)
