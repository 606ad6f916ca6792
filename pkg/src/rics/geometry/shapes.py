"""Procedural test meshes."""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh, build_mesh


def single_triangle() -> TriangleMesh:
    return build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


def quad(half_size: float = 1.0, z: float = 0.0) -> TriangleMesh:
    """Square in the plane ``z`` facing +z, two triangles."""
    s = half_size
    v = [[-s, -s, z], [s, -s, z], [s, s, z], [-s, s, z]]
    return build_mesh(v, [[0, 1, 2], [0, 2, 3]])


def unit_cube() -> TriangleMesh:
    """Closed cube [-0.5, 0.5]^3 with outward-wound faces (12 triangles)."""
    v = np.array(
        [[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)],
        dtype=np.float64,
    )
    # vertex index = 4*ix + 2*iy + iz
    f = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return build_mesh(v, f)


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Unit icosahedron refined by midpoint subdivision; 20 * 4**n faces."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in verts]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    return build_mesh(np.array(verts) * radius, faces)


def uv_torus(
    major: float = 1.0, minor: float = 0.35, n_major: int = 64, n_minor: int = 32
) -> TriangleMesh:
    """Closed torus around the z axis with ``2 * n_major * n_minor`` triangles."""
    u = np.arange(n_major) * (2 * np.pi / n_major)
    w = np.arange(n_minor) * (2 * np.pi / n_minor)
    uu, ww = np.meshgrid(u, w, indexing="ij")
    r = major + minor * np.cos(ww)
    v = np.stack([r * np.cos(uu), r * np.sin(uu), minor * np.sin(ww)], axis=-1).reshape(-1, 3)
    i = np.arange(n_major)[:, None]
    j = np.arange(n_minor)[None, :]
    a = i * n_minor + j
    b = ((i + 1) % n_major) * n_minor + j
    c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
    d = i * n_minor + (j + 1) % n_minor
    f = np.concatenate(
        [np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)]
    )
    return build_mesh(v, f)


def random_soup(n_triangles: int, seed: int = 0, size: float = 0.25) -> TriangleMesh:
    """Random triangle soup inside the unit cube: centers uniform, edges up to ``size``."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-0.5, 0.5, size=(n_triangles, 1, 3))
    offsets = rng.uniform(-size, size, size=(n_triangles, 3, 3))
    v = (centers + offsets).reshape(-1, 3)
    f = np.arange(3 * n_triangles).reshape(-1, 3)
    return build_mesh(v, f)


def bumpy_sphere(n_lat: int = 158, n_lon: int = 160, amplitude: float = 0.15, seed: int = 0) -> TriangleMesh:
    """Non-convex closed-ish blob: a lat/long sphere with radial bumps.

    About ``2 * n_lat * n_lon`` triangles; the defaults give roughly 50k.
    """
    rng = np.random.default_rng(seed)
    theta = (np.arange(1, n_lat) / n_lat) * np.pi
    phi = np.arange(n_lon) * (2 * np.pi / n_lon)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    k = rng.integers(2, 7, size=3)
    ph = rng.uniform(0, 2 * np.pi, size=3)
    rad = 1.0 + amplitude * (
        np.sin(k[0] * tt + ph[0]) * np.cos(k[1] * pp + ph[1]) + 0.5 * np.sin(k[2] * (tt + pp) + ph[2])
    )
    ring = np.stack(
        [rad * np.sin(tt) * np.cos(pp), rad * np.sin(tt) * np.sin(pp), rad * np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    north = len(ring)
    south = north + 1
    v = np.concatenate([ring, [[0, 0, 1.0]], [[0, 0, -1.0]]])
    rows = n_lat - 1
    faces = []
    i = np.arange(rows - 1)[:, None]
    j = np.arange(n_lon)[None, :]
    a = i * n_lon + j
    b = i * n_lon + (j + 1) % n_lon
    c = (i + 1) * n_lon + (j + 1) % n_lon
    d = (i + 1) * n_lon + j
    faces.append(np.stack([a, d, c], -1).reshape(-1, 3))
    faces.append(np.stack([a, c, b], -1).reshape(-1, 3))
    jj = np.arange(n_lon)
    faces.append(np.stack([np.full(n_lon, north), jj, (jj + 1) % n_lon], -1))
    last = (rows - 1) * n_lon
    faces.append(np.stack([np.full(n_lon, south), last + (jj + 1) % n_lon, last + jj], -1))
    return build_mesh(v, np.concatenate(faces))
