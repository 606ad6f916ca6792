from .canny import canny_edges, edge_weight_mask, normalize_per_channel
from .losses import (
    LossWeights,
    compose_harmonized,
    feature_matching,
    gan_d_loss,
    gan_g_loss,
    l1,
    projection_score,
    rgb_recon,
    total_objective,
    weighted_l1,
)
from .metrics import mse, ssim

__all__ = [
    "LossWeights", "canny_edges", "compose_harmonized", "edge_weight_mask",
    "feature_matching", "gan_d_loss", "gan_g_loss", "l1", "mse",
    "normalize_per_channel", "projection_score", "rgb_recon", "ssim",
    "total_objective", "weighted_l1",
]
