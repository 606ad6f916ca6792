"""Triangle meshes, rays and hit records."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEGENERATE_AREA_FACTOR = 1e-12


class MeshError(ValueError):
    """Raised for structurally invalid mesh input."""


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Validated, immutable triangle mesh.

    ``active`` marks triangles that take part in intersection queries;
    triangles whose area falls below ``1e-12 * diag**2`` are flagged
    degenerate and excluded.
    """

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    active: np.ndarray  # (T,) bool
    normals: np.ndarray = field(repr=False)  # (T, 3) unit geometric normals, zero when degenerate

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    @property
    def diagonal(self) -> float:
        d = self.bbox_max - self.bbox_min
        return float(np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]))

    @property
    def degenerate(self) -> np.ndarray:
        return np.flatnonzero(~self.active)

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        tri = self.triangles
        return self.vertices[tri[:, 0]], self.vertices[tri[:, 1]], self.vertices[tri[:, 2]]

    def transformed(self, matrix: np.ndarray) -> TriangleMesh:
        """Return the mesh with a 4x4 affine transform applied to its vertices."""
        m = np.asarray(matrix, dtype=np.float64)
        v = self.vertices
        out = np.empty_like(v)
        for r in range(3):
            out[:, r] = m[r, 0] * v[:, 0] + m[r, 1] * v[:, 1] + m[r, 2] * v[:, 2] + m[r, 3]
        return build_mesh(out, self.triangles)


def build_mesh(vertices, triangles) -> TriangleMesh:
    """Validate raw vertex/index arrays and build a :class:`TriangleMesh`."""
    v = np.array(vertices, dtype=np.float64, copy=True)
    t = np.array(triangles, copy=True)
    if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] == 0:
        raise MeshError(f"vertices must be a non-empty (V, 3) array, got shape {v.shape}")
    if t.ndim != 2 or t.shape[1] != 3 or t.shape[0] == 0:
        raise MeshError(f"triangles must be a non-empty (T, 3) array, got shape {t.shape}")
    if not np.issubdtype(t.dtype, np.integer):
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise MeshError("triangle indices must be integers")
    t = t.astype(np.int64)
    if not np.all(np.isfinite(v)):
        bad = np.flatnonzero(~np.all(np.isfinite(v), axis=1))
        raise MeshError(f"non-finite coordinate in vertex {int(bad[0])}")
    if t.min() < 0 or t.max() >= v.shape[0]:
        bad = np.flatnonzero(np.any((t < 0) | (t >= v.shape[0]), axis=1))
        raise MeshError(
            f"triangle {int(bad[0])} references vertex out of range [0, {v.shape[0]})"
        )

    lo = v.min(axis=0)
    hi = v.max(axis=0)
    d = hi - lo
    diag2 = float(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])

    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    n = np.cross(p1 - p0, p2 - p0)
    twice_area = np.sqrt(np.einsum("ij,ij->i", n, n))
    active = 0.5 * twice_area >= DEGENERATE_AREA_FACTOR * diag2
    # repeated indices are degenerate even when the bbox itself is zero-sized
    active &= (t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])
    active &= twice_area > 0.0
    normals = np.zeros_like(n)
    normals[active] = n[active] / twice_area[active, None]

    for arr in (v, t, lo, hi, active, normals):
        arr.setflags(write=False)
    return TriangleMesh(v, t, lo, hi, active, normals)


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_min: float = 0.0
    t_max: float = np.inf

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64).reshape(3)
        d = np.asarray(self.direction, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(o)) and np.all(np.isfinite(d))):
            raise ValueError("ray origin and direction must be finite")
        norm = np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be unit length (|d| = {norm!r})")
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError(f"need 0 <= t_min < t_max, got {self.t_min}, {self.t_max}")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)

    @classmethod
    def towards(cls, origin, direction, t_min: float = 0.0, t_max: float = np.inf) -> Ray:
        """Build a ray, normalizing ``direction`` first."""
        d = np.asarray(direction, dtype=np.float64)
        return cls(origin, d / np.sqrt(d @ d), t_min, t_max)

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass(frozen=True)
class HitRecord:
    t: float
    point: np.ndarray
    geometric_normal: np.ndarray
    triangle_index: int


def load_obj(path: str | Path) -> TriangleMesh:
    """Read a triangulated Wavefront OBJ file.

    Only ``v`` and ``f`` records are interpreted; other record types are
    skipped. Faces with more than three vertices are rejected.
    """
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad vertex coordinate") from exc
            elif tag == "f":
                refs = parts[1:]
                if len(refs) != 3:
                    raise MeshError(
                        f"{path}:{lineno}: only triangles are supported, face has {len(refs)} vertices"
                    )
                idx = []
                for ref in refs:
                    try:
                        k = int(ref.split("/", 1)[0])
                    except ValueError as exc:
                        raise MeshError(f"{path}:{lineno}: bad face index {ref!r}") from exc
                    if k == 0:
                        raise MeshError(f"{path}:{lineno}: OBJ indices are 1-based")
                    # negative indices are relative to the vertices read so far
                    idx.append(k - 1 if k > 0 else len(vertices) + k)
                faces.append((idx[0], idx[1], idx[2]))
    if not vertices or not faces:
        raise MeshError(f"{path}: no vertices or faces")
    return build_mesh(vertices, faces)


def save_obj(mesh: TriangleMesh, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in mesh.vertices.tolist():
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
