"""PNG and raw float32 tensor I/O.

Raw tensor layout (little-endian): ``b"IMGF"``, then ``u32`` height, width
and channels, then ``height * width * channels`` float32 values row-major
with channels innermost.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

IMGF_MAGIC = b"IMGF"
_IMGF_HEADER = struct.Struct("<4sIII")


class ImageFormatError(ValueError):
    pass


def write_imgf(array, path: str | Path) -> None:
    a = np.asarray(array, dtype=np.float32)
    if a.ndim == 2:
        a = a[..., None]
    if a.ndim != 3:
        raise ValueError(f"tensor must be (H, W) or (H, W, C), got {a.shape}")
    h, w, c = a.shape
    with open(path, "wb") as fh:
        fh.write(_IMGF_HEADER.pack(IMGF_MAGIC, h, w, c))
        fh.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


def read_imgf(path: str | Path) -> np.ndarray:
    """Return an ``(H, W, C)`` float32 array."""
    data = Path(path).read_bytes()
    if len(data) < _IMGF_HEADER.size:
        raise ImageFormatError(f"{path}: too short for IMGF header")
    magic, h, w, c = _IMGF_HEADER.unpack_from(data)
    if magic != IMGF_MAGIC:
        raise ImageFormatError(f"{path}: bad magic {magic!r}")
    n = h * w * c
    if len(data) != _IMGF_HEADER.size + 4 * n:
        raise ImageFormatError(f"{path}: payload does not match {h}x{w}x{c}")
    return np.frombuffer(data, dtype="<f4", offset=_IMGF_HEADER.size).reshape(h, w, c).astype(np.float32)


def read_png(path: str | Path, normalize: bool = True) -> np.ndarray:
    """Read an 8- or 16-bit PNG as ``(H, W)`` or ``(H, W, C)``.

    With ``normalize`` the raw integer values are divided by 255 or 65535;
    no colour-space conversion is applied.
    """
    with Image.open(path) as im:
        mode = im.mode
        arr = np.array(im)
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        scale = 65535.0
    elif mode in ("L", "RGB", "RGBA", "LA", "P", "1"):
        scale = 255.0
    else:
        raise ImageFormatError(f"{path}: unsupported PNG mode {mode}")
    if not normalize:
        return arr
    return arr.astype(np.float64) / scale


def write_png(array, path: str | Path, bits: int = 8) -> None:
    """Write integer pixel values as an 8-bit (gray/RGB/RGBA) or 16-bit gray PNG."""
    a = np.asarray(array)
    if bits == 8:
        Image.fromarray(np.ascontiguousarray(a, dtype=np.uint8)).save(path, format="PNG")
    elif bits == 16:
        if a.ndim != 2:
            raise ValueError("16-bit PNG output supports single-channel images only")
        Image.fromarray(np.ascontiguousarray(a, dtype=np.uint16)).save(path, format="PNG")
    else:
        raise ValueError(f"bits must be 8 or 16, got {bits}")
