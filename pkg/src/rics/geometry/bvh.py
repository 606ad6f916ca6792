"""Bounding volume hierarchy with exact first-hit / any-hit ray queries.

Triangles are intersected with a determinant (Moller-Trumbore) test. Rays
whose direction is parallel to a triangle's plane (``|det| < 1e-12``) miss
it, both triangle sides are hit, and a hit counts only when
``t_min < t < t_max``. On equal ``t`` the lowest original triangle index
wins, so traversal order never changes the answer.

Node boxes are padded by ``1e-6`` of the mesh extent so culling is
conservative: the tree only ever skips triangles the exact test would
reject, which keeps results bit-identical to a linear scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .mesh import HitRecord, Ray, TriangleMesh

LEAF_SIZE = 4
PARALLEL_EPS = 1e-12
BOX_PAD = 1e-6
_STACK = 128


@dataclass(frozen=True, eq=False)
class BvhAccel:
    """Flattened BVH in depth-first order (left child of node ``i`` is ``i + 1``).

    Leaf triangles are stored contiguously in ``tri_v0/tri_e1/tri_e2``;
    ``tri_id`` maps each slot back to its index in ``mesh.triangles``.
    """

    mesh: TriangleMesh
    node_lo: np.ndarray  # (N, 3)
    node_hi: np.ndarray  # (N, 3)
    node_right: np.ndarray  # (N,) right child, -1 for leaves
    node_axis: np.ndarray  # (N,) split axis
    node_start: np.ndarray  # (N,)
    node_count: np.ndarray  # (N,) 0 for inner nodes
    tri_v0: np.ndarray
    tri_e1: np.ndarray
    tri_e2: np.ndarray
    tri_id: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.node_lo.shape[0])

    def kernel_args(self) -> tuple:
        return (
            self.node_lo, self.node_hi, self.node_right, self.node_axis,
            self.node_start, self.node_count,
            self.tri_v0, self.tri_e1, self.tri_e2, self.tri_id,
        )

    def leaves(self):
        """Yield ``(node, original_triangle_indices)`` for every leaf."""
        for n in np.flatnonzero(self.node_right < 0):
            s, c = self.node_start[n], self.node_count[n]
            yield int(n), self.tri_id[s:s + c]


def build_bvh(mesh: TriangleMesh, leaf_size: int = LEAF_SIZE) -> BvhAccel:
    """Median split on the longest axis of each node's bounds."""
    ids = np.flatnonzero(mesh.active).astype(np.int64)
    p0, p1, p2 = mesh.corners()
    tlo = np.minimum(np.minimum(p0, p1), p2)
    thi = np.maximum(np.maximum(p0, p1), p2)
    cent = (p0 + p1 + p2) / 3.0
    scale = mesh.diagonal + float(np.abs(mesh.vertices).max())
    pad = BOX_PAD * scale if scale > 0 else BOX_PAD

    lo_l, hi_l, right_l, axis_l, start_l, count_l = [], [], [], [], [], []
    order: list[np.ndarray] = []
    n_placed = 0

    # explicit stack of (triangle ids, parent node whose right child this is)
    stack: list[tuple[np.ndarray, int]] = [(ids, -1)]
    while stack:
        sub, parent = stack.pop()
        node = len(lo_l)
        if parent >= 0:
            right_l[parent] = node
        if sub.size:
            lo = tlo[sub].min(axis=0) - pad
            hi = thi[sub].max(axis=0) + pad
        else:
            lo = np.full(3, np.inf)
            hi = np.full(3, -np.inf)
        lo_l.append(lo)
        hi_l.append(hi)
        right_l.append(-1)
        if sub.size <= leaf_size:
            axis_l.append(0)
            start_l.append(n_placed)
            count_l.append(sub.size)
            order.append(sub)
            n_placed += sub.size
            continue
        axis = int(np.argmax(hi - lo))
        srt = sub[np.argsort(cent[sub, axis], kind="stable")]
        mid = srt.size // 2
        axis_l.append(axis)
        start_l.append(0)
        count_l.append(0)
        # left subtree is laid out immediately after this node
        stack.append((srt[mid:], node))
        stack.append((srt[:mid], -1))

    tri_id = np.concatenate(order) if order else np.zeros(0, np.int64)
    v0 = np.ascontiguousarray(p0[tri_id])
    e1 = np.ascontiguousarray(p1[tri_id] - p0[tri_id])
    e2 = np.ascontiguousarray(p2[tri_id] - p0[tri_id])
    return BvhAccel(
        mesh=mesh,
        node_lo=np.array(lo_l, dtype=np.float64).reshape(-1, 3),
        node_hi=np.array(hi_l, dtype=np.float64).reshape(-1, 3),
        node_right=np.array(right_l, dtype=np.int64),
        node_axis=np.array(axis_l, dtype=np.int64),
        node_start=np.array(start_l, dtype=np.int64),
        node_count=np.array(count_l, dtype=np.int64),
        tri_v0=v0,
        tri_e1=e1,
        tri_e2=e2,
        tri_id=tri_id.astype(np.int64),
    )


# ---------------------------------------------------------------- kernels


@njit(cache=True, nogil=True, error_model="numpy", inline="always")
def intersect_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2, k):
    """Ray parameter of the hit with triangle slot ``k``, or ``inf`` on miss."""
    e2x, e2y, e2z = e2[k, 0], e2[k, 1], e2[k, 2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    e1x, e1y, e1z = e1[k, 0], e1[k, 1], e1[k, 2]
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < PARALLEL_EPS:
        return np.inf
    inv = 1.0 / det
    sx = ox - v0[k, 0]
    sy = oy - v0[k, 1]
    sz = oz - v0[k, 2]
    u = (sx * px + sy * py + sz * pz) * inv
    if u < 0.0 or u > 1.0:
        return np.inf
    qx = sy * e1z - sz * e1y
    qy = sz * e1x - sx * e1z
    qz = sx * e1y - sy * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return np.inf
    return (e2x * qx + e2y * qy + e2z * qz) * inv


@njit(cache=True, nogil=True, error_model="numpy", inline="always")
def _slab(lo, hi, n, o, d, inv, t0, t1):
    """Entry parameter of the ray segment [t0, t1] into box ``n``; inf if disjoint."""
    for a in range(3):
        if d[a] == 0.0:
            if o[a] < lo[n, a] or o[a] > hi[n, a]:
                return np.inf
        else:
            ta = (lo[n, a] - o[a]) * inv[a]
            tb = (hi[n, a] - o[a]) * inv[a]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                return np.inf
    return t0


@njit(cache=True, nogil=True, error_model="numpy")
def bvh_first_hit(o, d, t_min, t_max, lo, hi, right, axis, start, count, v0, e1, e2, tid):
    """Return ``(t, triangle_index)``; ``(inf, -1)`` on miss."""
    inv = np.empty(3)
    for a in range(3):
        inv[a] = 1.0 / d[a] if d[a] != 0.0 else 0.0
    best_t = np.inf
    best_id = -1
    stack = np.empty(_STACK, dtype=np.int64)
    sp = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        limit = t_max if best_t > t_max else best_t
        if _slab(lo, hi, n, o, d, inv, t_min, limit) == np.inf:
            continue
        c = count[n]
        if right[n] < 0:
            s = start[n]
            for k in range(s, s + c):
                t = intersect_triangle(o[0], o[1], o[2], d[0], d[1], d[2], v0, e1, e2, k)
                if t > t_min and t < t_max:
                    if t < best_t or (t == best_t and tid[k] < best_id):
                        best_t = t
                        best_id = tid[k]
        else:
            left = n + 1
            r = right[n]
            if d[axis[n]] < 0.0:
                stack[sp] = left
                stack[sp + 1] = r
            else:
                stack[sp] = r
                stack[sp + 1] = left
            sp += 2
    return best_t, best_id


@njit(cache=True, nogil=True, error_model="numpy")
def bvh_any_hit(o, d, t_min, t_max, lo, hi, right, axis, start, count, v0, e1, e2, tid):
    inv = np.empty(3)
    for a in range(3):
        inv[a] = 1.0 / d[a] if d[a] != 0.0 else 0.0
    stack = np.empty(_STACK, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        n = stack[sp]
        if _slab(lo, hi, n, o, d, inv, t_min, t_max) == np.inf:
            continue
        c = count[n]
        if right[n] < 0:
            s = start[n]
            for k in range(s, s + c):
                t = intersect_triangle(o[0], o[1], o[2], d[0], d[1], d[2], v0, e1, e2, k)
                if t > t_min and t < t_max:
                    return True
        else:
            stack[sp] = right[n]
            stack[sp + 1] = n + 1
            sp += 2
    return False


@njit(cache=True, nogil=True, error_model="numpy")
def bvh_first_hit_range(origins, dirs, t_min, t_max, out_t, out_id, i0, i1,
                        lo, hi, right, axis, start, count, v0, e1, e2, tid):
    for i in range(i0, i1):
        t, k = bvh_first_hit(origins[i], dirs[i], t_min, t_max,
                             lo, hi, right, axis, start, count, v0, e1, e2, tid)
        out_t[i] = t
        out_id[i] = k


@njit(cache=True, nogil=True, error_model="numpy")
def bvh_any_hit_range(origins, dirs, t_min, t_max, out, i0, i1,
                      lo, hi, right, axis, start, count, v0, e1, e2, tid):
    for i in range(i0, i1):
        out[i] = bvh_any_hit(origins[i], dirs[i], t_min, t_max,
                             lo, hi, right, axis, start, count, v0, e1, e2, tid)


@njit(cache=True, nogil=True, error_model="numpy")
def linear_first_hit_range(origins, dirs, t_min, t_max, out_t, out_id, v0, e1, e2, tid):
    for i in range(origins.shape[0]):
        o = origins[i]
        d = dirs[i]
        best_t = np.inf
        best_id = -1
        for k in range(v0.shape[0]):
            t = intersect_triangle(o[0], o[1], o[2], d[0], d[1], d[2], v0, e1, e2, k)
            if t > t_min and t < t_max and t < best_t:
                best_t = t
                best_id = tid[k]
        out_t[i] = best_t
        out_id[i] = best_id


# ---------------------------------------------------------------- public API


def _linear_arrays(mesh: TriangleMesh):
    ids = np.flatnonzero(mesh.active).astype(np.int64)
    p0, p1, p2 = mesh.corners()
    return (
        np.ascontiguousarray(p0[ids]),
        np.ascontiguousarray(p1[ids] - p0[ids]),
        np.ascontiguousarray(p2[ids] - p0[ids]),
        ids,
    )


def _record(mesh: TriangleMesh, ray: Ray, t: float, k: int) -> HitRecord | None:
    if k < 0:
        return None
    return HitRecord(float(t), ray.origin + t * ray.direction, mesh.normals[k].copy(), int(k))


def first_hit(accel: BvhAccel, ray: Ray) -> HitRecord | None:
    t, k = bvh_first_hit(ray.origin, ray.direction, float(ray.t_min), float(ray.t_max),
                         *accel.kernel_args())
    return _record(accel.mesh, ray, t, k)


def any_hit(accel: BvhAccel, ray: Ray) -> bool:
    return bool(bvh_any_hit(ray.origin, ray.direction, float(ray.t_min), float(ray.t_max),
                            *accel.kernel_args()))


def first_hit_linear(mesh: TriangleMesh, ray: Ray) -> HitRecord | None:
    """Reference query scanning every active triangle in index order."""
    t, k = first_hit_many_linear(mesh, ray.origin[None], ray.direction[None], ray.t_min, ray.t_max)
    return _record(mesh, ray, t[0], int(k[0]))


def first_hit_many(accel: BvhAccel, origins, dirs, t_min: float = 0.0, t_max: float = np.inf):
    """Batched first-hit; returns ``(t, triangle_index)`` arrays (``inf``/``-1`` on miss)."""
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    n = o.shape[0]
    out_t = np.empty(n)
    out_id = np.empty(n, dtype=np.int64)
    bvh_first_hit_range(o, d, float(t_min), float(t_max), out_t, out_id, 0, n, *accel.kernel_args())
    return out_t, out_id


def any_hit_many(accel: BvhAccel, origins, dirs, t_min: float = 0.0, t_max: float = np.inf):
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    out = np.empty(o.shape[0], dtype=np.bool_)
    bvh_any_hit_range(o, d, float(t_min), float(t_max), out, 0, o.shape[0], *accel.kernel_args())
    return out


def first_hit_many_linear(mesh: TriangleMesh, origins, dirs, t_min: float = 0.0, t_max: float = np.inf):
    o = np.ascontiguousarray(origins, dtype=np.float64)
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    out_t = np.empty(o.shape[0])
    out_id = np.empty(o.shape[0], dtype=np.int64)
    linear_first_hit_range(o, d, float(t_min), float(t_max), out_t, out_id, *_linear_arrays(mesh))
    return out_t, out_id
