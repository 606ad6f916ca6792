from .bvh import (
    BvhAccel,
    any_hit,
    any_hit_many,
    build_bvh,
    first_hit,
    first_hit_linear,
    first_hit_many,
    first_hit_many_linear,
)
from .mesh import HitRecord, MeshError, Ray, TriangleMesh, build_mesh, load_obj, save_obj

__all__ = [
    "BvhAccel", "HitRecord", "MeshError", "Ray", "TriangleMesh",
    "any_hit", "any_hit_many", "build_bvh", "build_mesh", "first_hit",
    "first_hit_linear", "first_hit_many", "first_hit_many_linear",
    "load_obj", "save_obj",
]
