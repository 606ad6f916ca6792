"""Grayscale PNG views of an occlusion map."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imageio import write_png
from .occlusion import N_DIRECTIONS, OcclusionMap

OCCLUDED, VISIBLE, BACKGROUND = 255, 128, 0


def direction_slice(omap: OcclusionMap, index: int) -> np.ndarray:
    """``uint8`` image for one direction: 255 occluded, 128 open foreground, 0 background."""
    if not 0 <= index < N_DIRECTIONS:
        raise IndexError(f"direction index {index} outside 0..{N_DIRECTIONS - 1}")
    bit = ((omap.words >> np.uint64(index)) & np.uint64(1)).astype(bool)
    img = np.full(omap.words.shape, BACKGROUND, dtype=np.uint8)
    img[omap.covered] = VISIBLE
    img[bit] = OCCLUDED
    return img


def popcount_image(omap: OcclusionMap) -> np.ndarray:
    """``uint8`` image of the occluded fraction ``popcount / 62``."""
    return np.rint(omap.popcount() * (255.0 / N_DIRECTIONS)).astype(np.uint8)


def export_dir_slices(omap: OcclusionMap, out_dir: str | Path, indices=None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(N_DIRECTIONS) if indices is None else indices:
        p = out / f"dir_{i:02d}.png"
        write_png(direction_slice(omap, i), p)
        paths.append(p)
    return paths


def export_popcount(omap: OcclusionMap, path: str | Path) -> Path:
    write_png(popcount_image(omap), path)
    return Path(path)
