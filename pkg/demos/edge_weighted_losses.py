"""
Edge-weighted shading loss
==========================

Builds the per-pixel weight mask from a synthetic shading image and
evaluates the reconstruction, adversarial and feature-matching terms on
toy tensors.
"""

# %%
import numpy as np

from rics.harmonization import (
    LossWeights,
    canny_edges,
    edge_weight_mask,
    feature_matching,
    gan_d_loss,
    gan_g_loss,
    rgb_recon,
    ssim,
    total_objective,
    weighted_l1,
)

rng = np.random.default_rng(0)

# %%
# Shading of a lit sphere in front of a bright wall: smooth inside, sharp at the rim.
yy, xx = np.mgrid[:96, :96] / 95.0 * 2 - 1
r2 = xx ** 2 + yy ** 2
nz = np.sqrt(np.clip(1 - r2 / 0.6, 0, 1))
shading = np.where(r2 < 0.6, 0.2 + 0.8 * nz, 0.9)
shading = np.repeat(shading[..., None], 3, axis=-1)

edges = canny_edges(shading[..., 0])
mask = edge_weight_mask(shading, base=1.0, alpha_edge=4.0)
print(f"edge pixels: {np.count_nonzero(edges)}, weight range {mask.min():.2f} .. {mask.max():.2f}")

# %%
# A slightly wrong prediction: blurrier and darker.
pred = 0.9 * shading + rng.normal(0, 0.01, shading.shape)
albedo = np.full_like(shading, 0.7)
target_rgb = shading * albedo

recon_s = weighted_l1(pred, shading, mask)
recon_g = rgb_recon(pred, albedo, target_rgb)
print(f"recon_s {recon_s:.5f}  recon_g {recon_g:.5f}  ssim {ssim(pred[..., 0], shading[..., 0]):.4f}")

# %%
real_scores = rng.uniform(0.6, 0.9, (8, 8, 1))
fake_scores = rng.uniform(0.2, 0.5, (8, 8, 1))
real_feats = [rng.random((64 // 2 ** k, 64 // 2 ** k, 8)) for k in range(4)]
fake_feats = [f + rng.normal(0, 0.05, f.shape) for f in real_feats]

gan = gan_g_loss(fake_scores)
fm = feature_matching(real_feats, fake_feats, (2, 3))
print(f"D loss {gan_d_loss(real_scores, fake_scores):.4f}  G loss {gan:.4f}  FM {fm:.5f}")

# %%
w = LossWeights()
print(f"total with weights {w}: {total_objective(gan, fm, recon_s, recon_g, w):.4f}")
