"""Per-pixel self-occlusion signatures packed into 64-bit words.

For every pixel whose primary ray hits the mesh, 62 rays are cast from the
hit point along a fixed direction set defined in the camera frame. Bit
``i`` of the pixel's word records whether ray ``i`` hits the mesh again,
bit 62 marks the pixel as foreground and bit 63 is always clear.

Direction layout (camera frame, pole axis = local +z):

* index 0: north pole ``(0, 0, 1)``
* indices 1..60: polar rings ``theta = 30, 60, 90, 120, 150`` degrees
  (outer loop), each with azimuths ``phi = 0, 30, ..., 330`` (inner loop)
* index 61: south pole ``(0, 0, -1)``
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numba import njit

from ._parallel import run_chunked
from .camera import CameraModel, primary_hit_map, rotate
from .geometry.bvh import BvhAccel, bvh_any_hit

N_DIRECTIONS = 62
COVERAGE_BIT = 62
RESERVED_BIT = 63
COVERAGE_MASK = np.uint64(1 << COVERAGE_BIT)
DIRECTION_MASK = np.uint64((1 << N_DIRECTIONS) - 1)
EPSILON_FACTOR = 1e-4

RING_THETAS = (30, 60, 90, 120, 150)
AZIMUTHS = tuple(range(0, 360, 30))

MAGIC = b"RICS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIII")


class RicsFormatError(ValueError):
    """Malformed occlusion word or RICS file."""


# cos(30 k deg) for k = 0..11, exact at 0, +-1/2, +-1
_S3 = np.sqrt(3.0) / 2.0
_COS30 = (1.0, _S3, 0.5, 0.0, -0.5, -_S3, -1.0, -_S3, -0.5, 0.0, 0.5, _S3)


def _cos_deg(deg: int) -> float:
    return _COS30[(deg // 30) % 12]


def _sin_deg(deg: int) -> float:
    return _COS30[(deg // 30 - 3) % 12]


@dataclass(frozen=True, eq=False)
class DirectionSet:
    vectors: np.ndarray  # (62, 3) camera-frame unit vectors
    theta_deg: np.ndarray
    phi_deg: np.ndarray

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def antipode(self, i: int) -> int:
        """Index of the direction opposite to ``i``."""
        if i == 0:
            return N_DIRECTIONS - 1
        if i == N_DIRECTIONS - 1:
            return 0
        ring, az = divmod(i - 1, 12)
        return 1 + (4 - ring) * 12 + (az + 6) % 12

    def in_world(self, cam: CameraModel) -> np.ndarray:
        """Directions rotated by the camera's extrinsic rotation (no translation)."""
        return np.ascontiguousarray(rotate(cam.cam_to_world, self.vectors))


@lru_cache(maxsize=1)
def sample_directions() -> DirectionSet:
    thetas = [0] + [t for t in RING_THETAS for _ in AZIMUTHS] + [180]
    phis = [0] + [p for _ in RING_THETAS for p in AZIMUTHS] + [0]
    vec = np.array(
        [
            (_sin_deg(t) * _cos_deg(p), _sin_deg(t) * _sin_deg(p), _cos_deg(t))
            for t, p in zip(thetas, phis)
        ],
        dtype=np.float64,
    )
    th = np.array(thetas, dtype=np.float64)
    ph = np.array(phis, dtype=np.float64)
    for a in (vec, th, ph):
        a.setflags(write=False)
    return DirectionSet(vec, th, ph)


# ---------------------------------------------------------------- packing


def pack(bits, covered: bool) -> int:
    """Pack 62 booleans and the coverage flag into one word (returned as int)."""
    b = np.asarray(bits, dtype=bool).reshape(-1)
    if b.size != N_DIRECTIONS:
        raise ValueError(f"expected {N_DIRECTIONS} bits, got {b.size}")
    word = 0
    for i in np.flatnonzero(b):
        word |= 1 << int(i)
    if covered:
        word |= 1 << COVERAGE_BIT
    return word


def unpack(word) -> tuple[np.ndarray, bool]:
    w = int(word)
    if w < 0 or w >> 64:
        raise RicsFormatError(f"word {w} does not fit in 64 bits")
    if w >> RESERVED_BIT:
        raise RicsFormatError("reserved bit 63 is set")
    bits = np.array([(w >> i) & 1 for i in range(N_DIRECTIONS)], dtype=bool)
    return bits, bool((w >> COVERAGE_BIT) & 1)


def pack_words(bits: np.ndarray, covered: np.ndarray) -> np.ndarray:
    """Vectorized :func:`pack`: ``bits`` is ``(..., 62)`` bool, ``covered`` is ``(...)``."""
    bits = np.asarray(bits, dtype=bool)
    weights = np.left_shift(np.uint64(1), np.arange(N_DIRECTIONS, dtype=np.uint64))
    words = np.bitwise_or.reduce(np.where(bits, weights, np.uint64(0)), axis=-1)
    words = np.asarray(words, dtype=np.uint64)
    return words | np.where(np.asarray(covered, dtype=bool), COVERAGE_MASK, np.uint64(0))


def unpack_words(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(words, dtype=np.uint64)
    if np.any(w >> np.uint64(RESERVED_BIT)):
        raise RicsFormatError("reserved bit 63 is set")
    shifts = np.arange(N_DIRECTIONS, dtype=np.uint64)
    bits = ((w[..., None] >> shifts) & np.uint64(1)).astype(bool)
    covered = ((w >> np.uint64(COVERAGE_BIT)) & np.uint64(1)).astype(bool)
    return bits, covered


def popcount(words: np.ndarray) -> np.ndarray:
    """Number of occluded directions per word (coverage bit excluded)."""
    w = np.asarray(words, dtype=np.uint64) & DIRECTION_MASK
    counts = np.zeros(w.shape, dtype=np.int64)
    for i in range(N_DIRECTIONS):
        counts += ((w >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
    return counts


# ---------------------------------------------------------------- maps


@dataclass(frozen=True, eq=False)
class OcclusionMap:
    words: np.ndarray  # (height, width) uint64, row-major from the top-left
    directions: DirectionSet

    @property
    def height(self) -> int:
        return int(self.words.shape[0])

    @property
    def width(self) -> int:
        return int(self.words.shape[1])

    @property
    def covered(self) -> np.ndarray:
        return (self.words & COVERAGE_MASK) != 0

    def bits(self) -> np.ndarray:
        """``(height, width, 62)`` boolean occlusion vectors."""
        return unpack_words(self.words)[0]

    def popcount(self) -> np.ndarray:
        return popcount(self.words)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OcclusionMap):
            return NotImplemented
        return self.words.shape == other.words.shape and bool(np.all(self.words == other.words))

    __hash__ = None


def default_epsilon(accel_or_mesh) -> float:
    mesh = getattr(accel_or_mesh, "mesh", accel_or_mesh)
    diag = mesh.diagonal
    return EPSILON_FACTOR * diag if diag > 0 else 1e-12


@njit(cache=True, nogil=True, error_model="numpy")
def _words_range(points, covered, dirs, eps, out, i0, i1,
                 lo, hi, right, axis, start, count, v0, e1, e2, tid):
    for i in range(i0, i1):
        if not covered[i]:
            out[i] = np.uint64(0)
            continue
        w = np.uint64(1) << np.uint64(62)
        p = points[i]
        for j in range(dirs.shape[0]):
            if bvh_any_hit(p, dirs[j], eps, np.inf, lo, hi, right, axis, start, count, v0, e1, e2, tid):
                w |= np.uint64(1) << np.uint64(j)
        out[i] = w


def occlusion_bits(surface_point, accel: BvhAccel, dirs_world, epsilon_t: float) -> np.ndarray:
    """Occlusion flags of one surface point for each world-space direction."""
    if not epsilon_t > 0:
        raise ValueError("epsilon_t must be positive")
    p = np.ascontiguousarray(np.asarray(surface_point, dtype=np.float64).reshape(1, 3))
    d = np.ascontiguousarray(dirs_world, dtype=np.float64)
    out = np.empty(1, dtype=np.uint64)
    _words_range(p, np.ones(1, dtype=np.bool_), d, float(epsilon_t), out, 0, 1, *accel.kernel_args())
    return ((out[0] >> np.arange(d.shape[0], dtype=np.uint64)) & np.uint64(1)).astype(bool)


def compute_rics_map(cam: CameraModel, accel: BvhAccel, threads: int | None = 1,
                     epsilon_t: float | None = None) -> OcclusionMap:
    """Occlusion map for every pixel of ``cam`` using the BVH.

    Rays start exactly at the primary hit point; ``epsilon_t`` (default
    ``1e-4`` of the mesh bbox diagonal) is the minimum accepted hit distance.
    """
    dset = sample_directions()
    eps = default_epsilon(accel) if epsilon_t is None else float(epsilon_t)
    hits = primary_hit_map(cam, accel, threads)
    covered = np.ascontiguousarray(hits.covered.reshape(-1))
    points = np.ascontiguousarray(np.where(covered[:, None], hits.point.reshape(-1, 3), 0.0))
    dirs = dset.in_world(cam)
    out = np.empty(covered.size, dtype=np.uint64)
    args = accel.kernel_args()
    run_chunked(
        lambda i0, i1: _words_range(points, covered, dirs, eps, out, i0, i1, *args),
        covered.size, threads, chunk=64,
    )
    return OcclusionMap(out.reshape(cam.height, cam.width), dset)


# ---------------------------------------------------------------- file format


def write_rics(omap: OcclusionMap, path: str | Path) -> None:
    """Little-endian: magic, version, width, height, dir count, then the words."""
    with open(path, "wb") as fh:
        fh.write(to_bytes(omap))


def to_bytes(omap: OcclusionMap) -> bytes:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, omap.width, omap.height, N_DIRECTIONS)
    return header + np.ascontiguousarray(omap.words, dtype="<u8").tobytes()


def from_bytes(data: bytes) -> OcclusionMap:
    if len(data) < _HEADER.size:
        raise RicsFormatError("file too short for RICS header")
    magic, version, width, height, ndir = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise RicsFormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise RicsFormatError(f"unsupported RICS version {version}")
    if ndir != N_DIRECTIONS:
        raise RicsFormatError(f"expected {N_DIRECTIONS} directions, file declares {ndir}")
    expected = _HEADER.size + 8 * width * height
    if len(data) != expected:
        raise RicsFormatError(f"payload size {len(data)} != expected {expected}")
    words = np.frombuffer(data, dtype="<u8", offset=_HEADER.size).astype(np.uint64)
    words = words.reshape(height, width)
    if np.any(words >> np.uint64(RESERVED_BIT)):
        raise RicsFormatError("reserved bit 63 is set")
    if np.any((words != 0) & ((words & COVERAGE_MASK) == 0)):
        raise RicsFormatError("occlusion bits set on an uncovered pixel")
    return OcclusionMap(words, sample_directions())


def read_rics(path: str | Path) -> OcclusionMap:
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
