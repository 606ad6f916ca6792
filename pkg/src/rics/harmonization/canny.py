"""Canny edges and the edge-derived importance mask for shading regression."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

DEFAULT_SIGMA = 1.0
DEFAULT_LOW = 0.05
DEFAULT_HIGH = 0.15

_EIGHT = np.ones((3, 3), dtype=bool)


def _gradients(img: np.ndarray, sigma: float):
    smooth = ndimage.gaussian_filter(img, sigma, mode="nearest") if sigma > 0 else img
    # Sobel responses divided by 8 estimate the per-pixel derivative
    gx = ndimage.sobel(smooth, axis=1, mode="nearest") / 8.0
    gy = ndimage.sobel(smooth, axis=0, mode="nearest") / 8.0
    return gx, gy


def _suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Non-maximum suppression along the quantized gradient direction.

    A pixel survives if it is ``>=`` its forward neighbor and strictly ``>``
    its backward one, so a plateau two pixels wide yields a single edge.
    """
    p = np.pad(mag, 1)
    h, w = mag.shape

    def at(dr, dc):
        return p[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]

    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = ((angle + 22.5) // 45.0).astype(int) % 4
    # (row, col) step along the gradient for sectors 0, 45, 90, 135 degrees
    steps = ((0, 1), (1, 1), (1, 0), (1, -1))
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in enumerate(steps):
        sel = sector == s
        keep |= sel & (mag >= at(dr, dc)) & (mag > at(-dr, -dc))
    return keep & (mag > 0)


def _canny_channel(img: np.ndarray, sigma: float, low: float, high: float) -> np.ndarray:
    gx, gy = _gradients(img, sigma)
    mag = np.hypot(gx, gy)
    thin = _suppress(mag, gx, gy)
    weak = thin & (mag >= low)
    strong = thin & (mag >= high)
    labels, n = ndimage.label(weak, structure=_EIGHT)
    if n == 0:
        return np.zeros_like(mag)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return np.where(seeded[labels], mag, 0.0)


def canny_edges(img, sigma: float = DEFAULT_SIGMA, low: float = DEFAULT_LOW,
                high: float = DEFAULT_HIGH) -> np.ndarray:
    """Gradient magnitude on Canny edge pixels, zero elsewhere.

    Gaussian blur, Sobel gradients, non-maximum suppression and hysteresis
    (8-connected) are applied to each channel of an ``(H, W)`` or
    ``(H, W, C)`` image independently. ``low``/``high`` are absolute
    thresholds on the derivative magnitude.
    """
    a = np.asarray(img, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise ValueError(f"expected (H, W) or (H, W, C) image, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("image contains non-finite values")
    if not 0 < low < high:
        raise ValueError(f"need 0 < low < high, got low={low}, high={high}")
    if a.ndim == 2:
        return _canny_channel(a, sigma, low, high)
    return np.stack([_canny_channel(a[..., c], sigma, low, high) for c in range(a.shape[2])], axis=-1)


def normalize_per_channel(mask: np.ndarray) -> np.ndarray:
    """Divide each channel by its maximum; all-zero channels stay zero."""
    m = np.asarray(mask, dtype=np.float64)
    axes = (0, 1)
    peak = m.max(axis=axes, keepdims=True) if m.ndim == 3 else np.array(m.max())
    safe = np.where(peak > 0, peak, 1.0)
    return np.where(peak > 0, m / safe, 0.0)


def edge_weight_mask(shading, base: float = 1.0, alpha_edge: float = 1.0,
                     sigma: float = DEFAULT_SIGMA, low: float = DEFAULT_LOW,
                     high: float = DEFAULT_HIGH) -> np.ndarray:
    """Per-pixel regression weights: ``base + alpha_edge * edges / max(edges)`` per channel."""
    if base < 0 or alpha_edge < 0:
        raise ValueError("base and alpha_edge must be non-negative")
    edges = canny_edges(shading, sigma, low, high)
    return base + alpha_edge * normalize_per_channel(edges)
