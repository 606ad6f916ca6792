"""Reconstruction, adversarial and feature-matching objectives as plain functions.

Everything here operates on numpy arrays and returns Python floats; no
autodiff. Images are ``(H, W)`` or ``(H, W, C)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LOG_FLOOR = 1e-7


def _same_shape(*arrays):
    out = [np.asarray(a, dtype=np.float64) for a in arrays]
    shapes = {a.shape for a in out}
    if len(shapes) != 1:
        raise ValueError(f"shape mismatch: {[a.shape for a in out]}")
    return out


def weighted_l1(pred, target, weights) -> float:
    """Mean over all elements of ``weights * |pred - target|``."""
    p, t, w = _same_shape(pred, target, weights)
    return float(np.mean(w * np.abs(p - t)))


def l1(pred, target) -> float:
    p, t = _same_shape(pred, target)
    return float(np.mean(np.abs(p - t)))


def rgb_recon(pred_shading, albedo, target_rgb) -> float:
    """Unweighted mean L1 between ``pred_shading * albedo`` and the target image."""
    s, a, y = _same_shape(pred_shading, albedo, target_rgb)
    return float(np.mean(np.abs(s * a - y)))


def compose_harmonized(shading, albedo, alpha, background) -> np.ndarray:
    """Alpha-blend the shaded foreground ``shading * albedo`` over ``background``.

    ``alpha`` may be ``(H, W)`` or ``(H, W, 1)`` and broadcasts over channels.
    """
    s = np.asarray(shading, dtype=np.float64)
    a = np.asarray(albedo, dtype=np.float64)
    bg = np.asarray(background, dtype=np.float64)
    al = np.asarray(alpha, dtype=np.float64)
    if s.shape != a.shape or s.shape != bg.shape:
        raise ValueError(f"shape mismatch: shading {s.shape}, albedo {a.shape}, background {bg.shape}")
    if al.shape[:2] != s.shape[:2]:
        raise ValueError(f"alpha {al.shape} does not match image {s.shape}")
    if np.any(~np.isfinite(al)) or al.min() < 0.0 or al.max() > 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if al.ndim == 2 and s.ndim == 3:
        al = al[..., None]
    return al * (s * a) + (1.0 - al) * bg


def projection_score(shared_feat, psi_out, omega_out) -> np.ndarray:
    """Patch scores ``psi + sum_c(feat * omega)`` as an ``(H, W, 1)`` grid."""
    f = np.asarray(shared_feat, dtype=np.float64)
    om = np.asarray(omega_out, dtype=np.float64)
    ps = np.asarray(psi_out, dtype=np.float64)
    if f.ndim != 3 or f.shape != om.shape:
        raise ValueError(f"feature {f.shape} and condition {om.shape} must both be (H, W, C)")
    if ps.ndim == 2:
        ps = ps[..., None]
    if ps.shape != (f.shape[0], f.shape[1], 1):
        raise ValueError(f"unconditional score must be (H, W, 1), got {ps.shape}")
    return ps + np.sum(f * om, axis=-1, keepdims=True)


def _probabilities(scores, name: str) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if np.any(~np.isfinite(s)) or np.any((s < 0.0) | (s > 1.0)):
        warnings.warn(f"{name} scores outside [0, 1]; clamping", RuntimeWarning, stacklevel=3)
        s = np.clip(np.nan_to_num(s, nan=0.5), 0.0, 1.0)
    return s


def _neg_log(x: np.ndarray) -> np.ndarray:
    return -np.log(np.maximum(x, LOG_FLOOR))


def gan_d_loss(real_scores, fake_scores, mismatched_scores=None) -> float:
    """Discriminator loss on post-sigmoid patch scores.

    ``-mean log D(real) - mean log(1 - D(fake))``; when ``mismatched_scores``
    (real images paired with a wrong condition) are given, their
    ``-mean log(1 - D)`` term is added as well. Log arguments are floored at 1e-7.
    """
    real = _probabilities(real_scores, "real")
    fake = _probabilities(fake_scores, "fake")
    loss = float(np.mean(_neg_log(real))) + float(np.mean(_neg_log(1.0 - fake)))
    if mismatched_scores is not None:
        mis = _probabilities(mismatched_scores, "mismatched")
        loss += float(np.mean(_neg_log(1.0 - mis)))
    return loss


def gan_g_loss(fake_scores) -> float:
    """Non-saturating generator loss ``-mean log D(fake)``."""
    return float(np.mean(_neg_log(_probabilities(fake_scores, "fake"))))


def feature_matching(real_stack: Sequence, fake_stack: Sequence,
                     layer_indices: Sequence[int] | None = (2, 3)) -> float:
    """Sum over selected layers of the mean absolute feature difference.

    ``layer_indices`` are 1-based positions in the stacks; ``None`` uses all layers.
    """
    if len(real_stack) != len(fake_stack):
        raise ValueError(f"stack depth mismatch: {len(real_stack)} vs {len(fake_stack)}")
    if layer_indices is None:
        layer_indices = range(1, len(real_stack) + 1)
    total = 0.0
    for k in layer_indices:
        if not 1 <= k <= len(real_stack):
            raise ValueError(f"layer index {k} out of range 1..{len(real_stack)}")
        r, f = _same_shape(real_stack[k - 1], fake_stack[k - 1])
        total += float(np.mean(np.abs(r - f)))
    return total


@dataclass(frozen=True)
class LossWeights:
    gan: float = 1.0
    fm: float = 1000.0
    recon_s: float = 1.0
    recon_g: float = 10.0

    def __post_init__(self):
        for name in ("gan", "fm", "recon_s", "recon_g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"loss weight {name} must be finite and >= 0, got {v}")


def total_objective(gan: float, fm: float, recon_s: float, recon_g: float,
                    weights: LossWeights = LossWeights()) -> float:
    return (
        weights.gan * gan
        + weights.fm * fm
        + weights.recon_s * recon_s
        + weights.recon_g * recon_g
    )
