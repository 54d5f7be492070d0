"""
Synthetic trials with known errors
==================================

A bout model generates annotated trials. Perturbation operations turn
the annotation into a prediction while keeping an exact ledger of the
segmental errors they introduce, so the scorer can be checked end to end.
"""

from norscore.rng import SplitMix64
from norscore.segmental import score
from norscore.synth import BoutModel, Dilate, PunchHole, generate_trial, perturb, random_spec, spec_to_text

trial = generate_trial(BoutModel(trial_s=60), seed=3)
gt = trial.combined
print(len(gt), "bouts in", trial.num_frames, "frames")

pred, ledger = perturb(gt, [Dilate(2), PunchHole(0, 3, 2)])
print("ledger:", {c: n for c, n in ledger.frames.items() if n})
print("scored:", {c: n for c, n in score(gt, pred).frames.items() if n})

rng = SplitMix64(1)
spec = random_spec(gt, rng, extra=4)
print(spec_to_text(spec))
pred, ledger = perturb(gt, spec)
assert score(gt, pred).frames == ledger.frames
print("random spec ledger matches the scorer")
