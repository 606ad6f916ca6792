"""
Sequence windows and part labels
================================

Training windows are 10 frames with a 5-frame hop, test windows 30 frames
with a 15-frame hop; sequences shorter than a window are dropped. Part
masks from different label sets are folded into a shared index space.
"""

# %%
import numpy as np

from rics.dataset import LABEL_MAPS, ManifestRow, remap_labels, slice_manifest, slice_sequences

for n in (9, 10, 23, 64):
    print(n, "frames ->", slice_sequences(n), "train,", slice_sequences(n, 30, 15), "test")

# %%
rows = [ManifestRow("walk_01", 48, 3), ManifestRow("sit_07", 8, 3), ManifestRow("run_02", 31, 1)]
windows = slice_manifest(rows)
print(f"{len(windows)} training windows from {len(rows)} sequences")
print(windows[:3])

# %%
# A 4x6 mask with a few SURREAL labels: head (16), torso pieces, right hand (22, 24).
mask = np.array([
    [0, 16, 16, 0, 0, 0],
    [1, 4, 7, 0, 22, 24],
    [13, 14, 15, 0, 18, 20],
    [2, 3, 0, 0, 0, 0],
])
for name in ("surreal14", "surreal6"):
    m = LABEL_MAPS[name]
    out = remap_labels(mask, m)
    print(name, {m.parts[i - 1]: int((out == i).sum()) for i in np.unique(out) if i})
