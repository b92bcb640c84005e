"""
Generate a synthetic scene and score a damaged copy of it
=========================================================

Builds a small category registry, renders one ground-truth video with
moving things over stuff bands, damages a copy of it, and prints the
window metrics for every configured span.
"""

import numpy as np

from vpseval import (Category, CategorySet, CorruptionSpec, PairCounts,
                     SceneSpec, WindowSpec, corrupt, extract_overlaps,
                     generate, stq, vpq_for_k, vpq_report)

registry = CategorySet([
    Category(1, "sky", False),
    Category(2, "road", False),
    Category(3, "grass", False),
    Category(10, "car", True),
    Category(11, "bike", True),
])

scene = SceneSpec(width=160, height=120, frames=12, n_things=4,
                  stuff_layout=(1, 2, 3), seed=42)
gt, semantic = generate(scene, registry)
print(f"scene: {gt.num_frames} frames of {gt.frame_shape}, "
      f"{len(gt.segments)} segments")

# a prediction that mislabels some stuff regions, swaps two thing ids
# halfway through, and erodes object boundaries
damage = CorruptionSpec(stuff_flip_prob=0.4, id_swap_frame=6,
                        erode_radius=1, void_hole_rate=0.03, seed=7)
pred = corrupt(gt, damage, registry)
changed = int((pred.segment_maps != gt.segment_maps).sum())
print(f"corruption touched {changed} of {gt.segment_maps.size} pixels\n")

# one confusion histogram per video feeds every window span
counts = PairCounts(pred.segment_maps, gt.segment_maps)
per_k = {}
for k in (1, 2, 4, 6):
    acc, per_k[k] = vpq_for_k(
        extract_overlaps(pred, gt, WindowSpec(k), counts=counts), registry)
    worst = min(acc.per_category_values().items(), key=lambda kv: kv[1])
    print(f"VPQ^{k} = {per_k[k]:.4f}   (weakest category: "
          f"{registry[worst[0]].name} at {worst[1]:.4f})")

report = vpq_report(per_k)
tracking = stq(pred, gt, registry)
print(f"\nmean VPQ over k: {report.mean_vpq:.4f}")
print(f"STQ = {tracking.stq:.4f}  (SQ {tracking.sq:.4f}, AQ {tracking.aq:.4f})")

# the id swap is invisible to single frames but not to longer windows
assert per_k[1] > per_k[6]
print("\nlonger windows punish the identity swap; k=1 never sees it")
