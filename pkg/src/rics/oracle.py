"""Brute-force occlusion maps for cross-checking the BVH path.

Every ray is tested against every non-degenerate triangle in index order,
with an intersection routine written independently of the accelerated one.
Only camera ray generation and the direction set are shared.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._parallel import run_chunked
from .camera import CameraModel, pixel_rays
from .geometry.mesh import TriangleMesh
from .occlusion import OcclusionMap, default_epsilon, sample_directions


_BLOCK = 64


@njit(cache=True, nogil=True, error_model="numpy", inline="always")
def _hit_t(ox, oy, oz, dx, dy, dz, ax, ay, az, ux, uy, uz, wx, wy, wz, k):
    """``(t, ok)`` for triangle ``k`` given its corner ``a`` and edges ``u = b - a``,
    ``w = c - a``. Written without branches so the scan loops vectorize."""
    hx = dy * wz[k] - dz * wy[k]
    hy = dz * wx[k] - dx * wz[k]
    hz = dx * wy[k] - dy * wx[k]
    det = ux[k] * hx + uy[k] * hy + uz[k] * hz
    f = 1.0 / det
    sx = ox - ax[k]
    sy = oy - ay[k]
    sz = oz - az[k]
    bu = (sx * hx + sy * hy + sz * hz) * f
    qx = sy * uz[k] - sz * uy[k]
    qy = sz * ux[k] - sx * uz[k]
    qz = sx * uy[k] - sy * ux[k]
    bv = (dx * qx + dy * qy + dz * qz) * f
    t = (wx[k] * qx + wy[k] * qy + wz[k] * qz) * f
    ok = ((det <= -1e-12) | (det >= 1e-12)) & (bu >= 0.0) & (bu <= 1.0) & (bv >= 0.0) & (bu + bv <= 1.0)
    return t, ok


@njit(cache=True, nogil=True, error_model="numpy")
def _primary_range(origins, dirs, ax, ay, az, ux, uy, uz, wx, wy, wz, out_t, out_k, i0, i1):
    for i in range(i0, i1):
        ox, oy, oz = origins[i, 0], origins[i, 1], origins[i, 2]
        dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        best = np.inf
        best_k = -1
        for k in range(ax.shape[0]):
            t, ok = _hit_t(ox, oy, oz, dx, dy, dz, ax, ay, az, ux, uy, uz, wx, wy, wz, k)
            if ok and t > 0.0 and t < best:
                best = t
                best_k = k
        out_t[i] = best
        out_k[i] = best_k


@njit(cache=True, nogil=True, error_model="numpy")
def _count_hits(ox, oy, oz, dx, dy, dz, eps, ax, ay, az, ux, uy, uz, wx, wy, wz, k0, k1):
    n = 0
    for k in range(k0, k1):
        t, ok = _hit_t(ox, oy, oz, dx, dy, dz, ax, ay, az, ux, uy, uz, wx, wy, wz, k)
        n += ok & (t > eps)
    return n


@njit(cache=True, nogil=True, error_model="numpy")
def _occlusion_range(points, covered, dirs, eps, ax, ay, az, ux, uy, uz, wx, wy, wz, out, i0, i1):
    n_tri = ax.shape[0]
    for i in range(i0, i1):
        word = np.uint64(0)
        if covered[i]:
            word = np.uint64(1) << np.uint64(62)
            ox, oy, oz = points[i, 0], points[i, 1], points[i, 2]
            for j in range(dirs.shape[0]):
                dx, dy, dz = dirs[j, 0], dirs[j, 1], dirs[j, 2]
                # scan in blocks, stopping after the first block with a hit
                for k0 in range(0, n_tri, _BLOCK):
                    k1 = min(k0 + _BLOCK, n_tri)
                    if _count_hits(ox, oy, oz, dx, dy, dz, eps,
                                   ax, ay, az, ux, uy, uz, wx, wy, wz, k0, k1) > 0:
                        word |= np.uint64(1) << np.uint64(j)
                        break
        out[i] = word


def brute_force_rics_map(cam: CameraModel, mesh: TriangleMesh, threads: int | None = 1,
                         epsilon_t: float | None = None) -> OcclusionMap:
    """Occlusion map by exhaustive ray/triangle testing; O(pixels * 63 * triangles)."""
    keep = np.flatnonzero(mesh.active)
    tri = mesh.triangles[keep]
    a = mesh.vertices[tri[:, 0]]
    b = mesh.vertices[tri[:, 1]]
    c = mesh.vertices[tri[:, 2]]
    soa = tuple(np.ascontiguousarray(col) for m in (a, b - a, c - a) for col in m.T)
    eps = default_epsilon(mesh) if epsilon_t is None else float(epsilon_t)

    o, d = pixel_rays(cam)
    n = o.shape[0]
    t = np.empty(n)
    k = np.empty(n, dtype=np.int64)
    run_chunked(lambda i0, i1: _primary_range(o, d, *soa, t, k, i0, i1), n, threads, chunk=64)
    covered = k >= 0
    points = np.zeros_like(o)
    points[covered] = o[covered] + t[covered, None] * d[covered]

    dirs = sample_directions().in_world(cam)
    out = np.empty(n, dtype=np.uint64)
    run_chunked(
        lambda i0, i1: _occlusion_range(points, covered, dirs, eps, *soa, out, i0, i1),
        n, threads, chunk=64,
    )
    return OcclusionMap(out.reshape(cam.height, cam.width), sample_directions())
