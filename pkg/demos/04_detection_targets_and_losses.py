"""
Detection targets and the training losses
=========================================

Encodes a facade's objects into the low-resolution training targets
(center heatmap with Gaussian splats, size/offset/corner regression), then
walks the loss suite: closed-form values at known points, behavior under
noise, and an analytic-vs-finite-difference gradient check.
"""

import numpy as np

from facadekit import (
    cross_entropy,
    encode_targets,
    extract_instances,
    focal_loss,
    grad_check,
    offset_loss,
    one_hot,
    size_loss,
    synth_palette,
)
from facadekit.synth import SynthSpec, generate

rng = np.random.default_rng(0)
palette = synth_palette()

spec = SynthSpec(width=96, height=120, rows=2, cols=3, window_w=12,
                 window_h=16, spacing_x=28, spacing_y=44, margin_top=10)
truth_map, _, _ = generate(spec)
objects = extract_instances(truth_map, palette, min_area=8)
targets = encode_targets(objects, (96, 120), stride=4)

print(f"{len(objects)} objects -> heatmap {targets.heatmap.shape} "
      f"(classes x grid_h x grid_w), stride 4")
print(f"peak cells per object: {targets.object_cells.tolist()}")
print(f"offsets land in [0,1): {targets.offset_targets.min():.2f}.."
      f"{targets.offset_targets.max():.2f}")

# cross entropy against one-hot semantics: the uniform prediction sits at
# exactly N*ln(M)
n_pix, n_cls = 60, 5
labels = rng.integers(0, n_cls, size=n_pix)
semantic_truth = one_hot(labels, n_cls)
uniform = np.full((n_pix, n_cls), 1.0 / n_cls)
print(f"\nuniform cross entropy: {cross_entropy(uniform, semantic_truth):.6f}")
print(f"N*ln(M)              : {n_pix * np.log(n_cls):.6f}")

# focal loss: a confident, correct detector scores ~0; noise is punished
eps = 1e-9
confident = np.where(targets.heatmap >= 1.0, 1.0 - eps, eps)
noisy = np.clip(confident + rng.uniform(-0.3, 0.3, confident.shape), 0.01, 0.99)
print(f"\nfocal loss, confident detector: {focal_loss(confident, targets.heatmap):.2e}")
print(f"focal loss, noisy detector    : {focal_loss(noisy, targets.heatmap):.4f}")

# size regression: the summed-dimension form can be fooled by aspect-ratio
# errors that keep w+h constant; the per-dimension form cannot
swapped = targets.size_targets[:, ::-1].copy()
print(f"\nsize loss (summed) on swapped w/h : {size_loss(swapped, targets.size_targets):.4f}")
print("size loss (per-dim) on swapped w/h: "
      f"{size_loss(swapped, targets.size_targets, per_dimension=True):.4f}")

# offset loss only reads the cells that own an object
grid_h, grid_w = targets.heatmap.shape[1:]
offset_pred = rng.uniform(0, 1, (grid_h, grid_w, 2))
for i, (gx, gy) in enumerate(targets.object_cells):
    offset_pred[gy, gx] = targets.offset_targets[i]
print(f"\noffset loss with exact predictions at object cells: "
      f"{offset_loss(offset_pred, targets):.2e}")

# gradient check: worst relative error between analytic gradients and
# central differences, sampled at random coordinates
pred = rng.uniform(0.05, 0.95, size=(n_pix, n_cls))
err_ce = grad_check("cross_entropy", {"pred": pred, "truth": semantic_truth}, rng=rng)
heat_pred = rng.uniform(0.05, 0.95, size=targets.heatmap.shape)
err_focal = grad_check(
    "focal",
    {"pred": heat_pred, "truth": targets.heatmap, "alpha": 2.0, "beta": 4.0},
    rng=rng,
)
print(f"\ngrad check, cross entropy: {err_ce:.2e}")
print(f"grad check, focal loss   : {err_focal:.2e}")
