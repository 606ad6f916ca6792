"""Self-occlusion maps sampled in camera space, plus the image-harmonization
loss and metric toolkit that consumes them."""

from .camera import CameraModel, HitPointMap, pixel_ray, pixel_rays, primary_hit_map
from .geometry import BvhAccel, Ray, TriangleMesh, any_hit, build_bvh, build_mesh, first_hit, load_obj
from .occlusion import (
    DirectionSet,
    OcclusionMap,
    compute_rics_map,
    occlusion_bits,
    pack,
    read_rics,
    sample_directions,
    unpack,
    write_rics,
)
from .oracle import brute_force_rics_map

__version__ = "0.1.0"

__all__ = [
    "BvhAccel", "CameraModel", "DirectionSet", "HitPointMap", "OcclusionMap", "Ray",
    "TriangleMesh", "any_hit", "brute_force_rics_map", "build_bvh", "build_mesh",
    "compute_rics_map", "first_hit", "load_obj", "occlusion_bits", "pack", "pixel_ray",
    "pixel_rays", "primary_hit_map", "read_rics", "sample_directions", "unpack", "write_rics",
]
