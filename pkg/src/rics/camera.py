"""Pinhole camera: per-pixel primary rays and the first-hit map.

Camera-local frame is right-handed with x right, y up and the view along
-z. Pixel ``(px, py)`` is sampled at its center ``(px + 0.5, py + 0.5)``;
row 0 is the top image row and the principal point is the image center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._parallel import run_chunked
from .geometry.bvh import BvhAccel, bvh_first_hit_range
from .geometry.mesh import Ray


@dataclass(frozen=True, eq=False)
class CameraModel:
    cam_to_world: np.ndarray
    vfov_deg: float
    width: int
    height: int

    def __post_init__(self):
        m = np.array(self.cam_to_world, dtype=np.float64).reshape(4, 4)
        if not np.all(np.isfinite(m)):
            raise ValueError("cam_to_world must be finite")
        r = m[:3, :3]
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-6:
            raise ValueError("cam_to_world rotation block is not orthonormal")
        if np.linalg.det(r) < 0:
            raise ValueError("cam_to_world rotation must be proper (det = +1)")
        if np.abs(m[3] - [0, 0, 0, 1]).max() > 1e-12:
            raise ValueError("cam_to_world bottom row must be (0, 0, 0, 1)")
        if not 0.0 < float(self.vfov_deg) < 180.0:
            raise ValueError(f"vfov_deg must lie in (0, 180), got {self.vfov_deg}")
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError("width and height must be >= 1")
        m.setflags(write=False)
        object.__setattr__(self, "cam_to_world", m)
        object.__setattr__(self, "vfov_deg", float(self.vfov_deg))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def rotation(self) -> np.ndarray:
        return self.cam_to_world[:3, :3]

    @property
    def position(self) -> np.ndarray:
        return self.cam_to_world[:3, 3].copy()

    @classmethod
    def look_at(cls, eye, target, up=(0.0, 1.0, 0.0), vfov_deg: float = 45.0,
                width: int = 64, height: int = 64) -> CameraModel:
        eye = np.asarray(eye, dtype=np.float64)
        fwd = np.asarray(target, dtype=np.float64) - eye
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(up, dtype=np.float64))
        n = np.linalg.norm(right)
        if n < 1e-9:
            raise ValueError("up vector is parallel to the viewing direction")
        right /= n
        true_up = np.cross(right, fwd)
        m = np.eye(4)
        m[:3, 0] = right
        m[:3, 1] = true_up
        m[:3, 2] = -fwd
        m[:3, 3] = eye
        return cls(m, vfov_deg, width, height)

    def with_extrinsic(self, cam_to_world) -> CameraModel:
        return CameraModel(cam_to_world, self.vfov_deg, self.width, self.height)

    def to_dict(self) -> dict:
        return {
            "cam_to_world": [float(x) for x in self.cam_to_world.reshape(-1)],
            "vfov_deg": self.vfov_deg,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CameraModel:
        try:
            m = d["cam_to_world"]
            if len(m) != 16:
                raise ValueError("cam_to_world needs 16 numbers (row-major 4x4)")
            return cls(np.asarray(m, dtype=np.float64), d["vfov_deg"], d["width"], d["height"])
        except KeyError as exc:
            raise ValueError(f"camera JSON is missing field {exc.args[0]!r}") from None


def load_camera(path: str | Path) -> CameraModel:
    with open(path, encoding="utf-8") as fh:
        return CameraModel.from_dict(json.load(fh))


def save_camera(cam: CameraModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cam.to_dict(), fh, indent=2)


def rotate(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply the 3x3 block of ``m`` to rows of ``v`` with a fixed summation order."""
    out = np.empty(v.shape, dtype=np.float64)
    for r in range(3):
        out[..., r] = m[r, 0] * v[..., 0] + m[r, 1] * v[..., 1] + m[r, 2] * v[..., 2]
    return out


def _local_directions(cam: CameraModel, px: np.ndarray, py: np.ndarray):
    tan_half = math.tan(math.radians(cam.vfov_deg) / 2.0)
    aspect = cam.width / cam.height
    x = (2.0 * (px + 0.5) / cam.width - 1.0) * (tan_half * aspect)
    y = (1.0 - 2.0 * (py + 0.5) / cam.height) * tan_half
    norm = np.sqrt(x * x + y * y + 1.0)
    d = np.stack([x / norm, y / norm, -1.0 / norm], axis=-1)
    return d, norm


def pixel_directions(cam: CameraModel, px, py) -> np.ndarray:
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    d, _ = _local_directions(cam, px, py)
    return rotate(cam.cam_to_world, d)


def pixel_ray(cam: CameraModel, px: int, py: int) -> Ray:
    if not (0 <= px < cam.width and 0 <= py < cam.height):
        raise IndexError(f"pixel ({px}, {py}) outside {cam.width}x{cam.height} image")
    d = pixel_directions(cam, np.array([px]), np.array([py]))[0]
    return Ray(cam.position, d)


def pixel_rays(cam: CameraModel) -> tuple[np.ndarray, np.ndarray]:
    """Origins and unit directions for every pixel, row-major from the top-left."""
    py, px = np.meshgrid(np.arange(cam.height), np.arange(cam.width), indexing="ij")
    d = pixel_directions(cam, px.reshape(-1), py.reshape(-1))
    o = np.broadcast_to(cam.position, d.shape).copy()
    return o, np.ascontiguousarray(d)


@dataclass(frozen=True, eq=False)
class HitPointMap:
    """Per-pixel first hits. Arrays are ``(height, width, ...)``; uncovered pixels hold
    ``t = inf``, ``triangle = -1`` and NaN points/normals."""

    covered: np.ndarray
    t: np.ndarray
    depth: np.ndarray
    point: np.ndarray
    normal: np.ndarray
    triangle: np.ndarray

    @property
    def n_covered(self) -> int:
        return int(self.covered.sum())


def primary_hit_map(cam: CameraModel, accel: BvhAccel, threads: int | None = 1) -> HitPointMap:
    o, d = pixel_rays(cam)
    n = o.shape[0]
    t = np.empty(n)
    tri = np.empty(n, dtype=np.int64)
    args = accel.kernel_args()
    run_chunked(
        lambda i0, i1: bvh_first_hit_range(o, d, 0.0, np.inf, t, tri, i0, i1, *args),
        n, threads,
    )
    return _assemble(cam, o, d, t, tri, accel.mesh.normals)


def _assemble(cam, o, d, t, tri, normals) -> HitPointMap:
    h, w = cam.height, cam.width
    covered = tri >= 0
    point = np.full(o.shape, np.nan)
    point[covered] = o[covered] + t[covered, None] * d[covered]
    nrm = np.full(o.shape, np.nan)
    nc = normals[tri[covered]]
    facing = np.einsum("ij,ij->i", nc, d[covered]) > 0.0
    nc[facing] = -nc[facing]
    nrm[covered] = nc
    # distance along the optical axis: t times the local -z component
    fwd = -rotate(cam.cam_to_world, np.array([0.0, 0.0, 1.0]))
    depth = np.full(t.shape, np.inf)
    depth[covered] = t[covered] * np.einsum("ij,j->i", d[covered], fwd)
    return HitPointMap(
        covered=covered.reshape(h, w),
        t=t.reshape(h, w),
        depth=depth.reshape(h, w),
        point=point.reshape(h, w, 3),
        normal=nrm.reshape(h, w, 3),
        triangle=tri.reshape(h, w),
    )
