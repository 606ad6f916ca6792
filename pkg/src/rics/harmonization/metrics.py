"""Full-reference image metrics."""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def ssim(a, b, window: int = 11, k1: float = 0.01, k2: float = 0.03,
         sigma: float = 1.5, data_range: float = 1.0) -> float:
    """Mean SSIM with a Gaussian window.

    Local statistics use a Gaussian of width ``sigma`` truncated to
    ``window`` pixels (reflect padding); the mean is taken over positions
    where the window fits inside the image. Multi-channel images are scored
    per channel and averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 3:
        return float(np.mean([ssim(a[..., c], b[..., c], window, k1, k2, sigma, data_range)
                              for c in range(a.shape[2])]))
    if a.ndim != 2:
        raise ValueError(f"expected (H, W) or (H, W, C), got {a.shape}")
    if window % 2 == 0 or window < 1:
        raise ValueError("window must be a positive odd integer")
    if min(a.shape) < window:
        raise ValueError(f"image {a.shape} smaller than the {window}px window")

    radius = window // 2
    filt = lambda x: ndimage.gaussian_filter(x, sigma, mode="reflect", truncate=radius / sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    smap = num / den
    if radius:
        smap = smap[radius:-radius, radius:-radius]
    return float(smap.mean())
