"""
Clip extraction and train/validation split
==========================================

Each annotated run is cut into fixed-length clips. Runs of investigation
give ``investigate`` clips and the gaps between them give ``explore`` clips.
The manifest is then shuffled with a seeded generator and split by ratio.
"""

from norscore.clipper import extract_clips, split, train_size, write_manifest
from norscore.synth import BoutModel, generate_trial

trials = [generate_trial(BoutModel(trial_s=120), seed, f"video{seed:02d}") for seed in range(20)]
clips = [c for t in trials for c in extract_clips(t, clip_len=30)]
print(len(clips), "clips,", sum(c.class_label == "investigate" for c in clips), "investigate")

s = split(clips, ratio=0.75, seed=7)
print(len(s.train), "train /", len(s.validation), "val")

# the split size is floor(ratio * n)
print("2243 clips ->", train_size(2243, 0.75), "train")

print(write_manifest(s).splitlines()[:4])
