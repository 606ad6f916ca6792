"""
Self-occlusion map of a torus
=============================

Casts one primary ray per pixel, then 62 secondary rays from every hit
point, and packs the result into one 64-bit word per pixel. The brute-force
oracle is run on the same scene to confirm the two agree bit for bit.
"""

# %%
import sys
import time
from pathlib import Path

import numpy as np

from rics import CameraModel, compute_rics_map
from rics.geometry import build_bvh, shapes
from rics.occlusion import read_rics, write_rics
from rics.oracle import brute_force_rics_map
from rics.visualize import export_dir_slices, export_popcount

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %%
# A torus is a nice test object: the inner ring is heavily self-occluded
# while the outer rim is not.
mesh = shapes.uv_torus()
accel = build_bvh(mesh)
cam = CameraModel.look_at(eye=[0.0, -3.2, 1.6], target=[0, 0, 0], up=[0, 0, 1], vfov_deg=45, width=96, height=96)
print(f"{mesh.n_active} triangles, bbox diagonal {mesh.diagonal:.3f}")

# %%
t0 = time.perf_counter()
omap = compute_rics_map(cam, accel)
print(f"BVH map: {time.perf_counter() - t0:.3f}s, {int(omap.covered.sum())} covered pixels")

t0 = time.perf_counter()
ref = brute_force_rics_map(cam, mesh)
print(f"oracle map: {time.perf_counter() - t0:.3f}s, identical: {omap == ref}")

# %%
# Fraction of blocked directions, over covered pixels only.
pc = omap.popcount()[omap.covered]
print(f"occluded directions per pixel: min {pc.min()}, median {int(np.median(pc))}, max {pc.max()}")

# %%
# Round-trip through the binary file and dump a few views.
write_rics(omap, out / "torus.rics")
assert read_rics(out / "torus.rics") == omap
export_popcount(omap, out / "torus_popcount.png")
export_dir_slices(omap, out / "torus_slices", [0, 25, 31, 61])
print(f"wrote {out}/torus.rics, popcount image and 4 direction slices")
