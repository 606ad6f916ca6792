"""Sequence slicing and part-segmentation label remapping."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAIN_WINDOW, TRAIN_STRIDE = 10, 5
TEST_WINDOW, TEST_STRIDE = 30, 15


def slice_sequences(seq_len: int, window: int = TRAIN_WINDOW, stride: int = TRAIN_STRIDE,
                    drop_short: bool = True) -> list[int]:
    """Start frames of sliding windows over a sequence of ``seq_len`` frames.

    With ``drop_short`` only full windows are kept (so a sequence shorter
    than ``window`` yields nothing); otherwise trailing windows that run
    past the end are kept as well.
    """
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    if seq_len < 0:
        raise ValueError("seq_len must be >= 0")
    if drop_short:
        return list(range(0, seq_len - window + 1, stride))
    return list(range(0, seq_len, stride))


@dataclass(frozen=True)
class SliceWindow:
    sequence_id: str
    start_frame: int
    length: int
    camera_id: int


@dataclass(frozen=True)
class ManifestRow:
    sequence_id: str
    frame_count: int
    camera_count: int


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Parse ``id,frame_count,camera_count`` lines; a header line is optional."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or rec[0].startswith("#"):
                continue
            if lineno == 1 and rec[0].strip() == "id":
                continue
            if len(rec) != 3:
                raise ValueError(f"{path}:{lineno}: expected id,frame_count,camera_count")
            try:
                frames, cams = int(rec[1]), int(rec[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: counts must be integers") from None
            if frames < 0 or cams < 1:
                raise ValueError(f"{path}:{lineno}: need frame_count >= 0 and camera_count >= 1")
            rows.append(ManifestRow(rec[0].strip(), frames, cams))
    return rows


def slice_manifest(rows, window: int = TRAIN_WINDOW, stride: int = TRAIN_STRIDE,
                   drop_short: bool = True) -> list[SliceWindow]:
    """Windows for every camera track; each track is sliced as its own sequence."""
    out = []
    for r in rows:
        for cam in range(r.camera_count):
            for s in slice_sequences(r.frame_count, window, stride, drop_short):
                out.append(SliceWindow(r.sequence_id, s, min(window, r.frame_count - s), cam))
    return out


# ---------------------------------------------------------------- label maps


@dataclass(frozen=True)
class LabelMap:
    name: str
    parts: tuple[str, ...]  # target index i + 1 -> name
    sources: tuple[tuple[int, ...], ...]  # source labels merged into target i + 1
    source_max: int

    @property
    def mapping(self) -> dict[int, int]:
        return {src: i + 1 for i, group in enumerate(self.sources) for src in group}

    def lut(self) -> np.ndarray:
        table = np.zeros(self.source_max + 1, dtype=np.int64)
        for src, dst in self.mapping.items():
            table[src] = dst
        return table


_PARTS14 = (
    "Head", "Torso", "RightUpperArm", "RightLowerArm", "RightHand",
    "LeftUpperArm", "LeftLowerArm", "LeftHand", "RightUpperLeg", "RightLowerLeg",
    "RightFoot", "LeftUpperLeg", "LeftLowerLeg", "LeftFoot",
)
_PARTS6 = ("Head", "Torso", "RightArm", "LeftArm", "RightLeg", "LeftLeg")
_TORSO = (1, 4, 7, 10, 13, 14, 15)

LABEL_MAPS = {
    m.name: m
    for m in (
        LabelMap("surreal14", _PARTS14, (
            (16,), _TORSO, (18,), (20,), (22, 24), (17,), (19,), (21, 23),
            (3,), (6,), (9, 12), (2,), (5,), (8, 11),
        ), 24),
        # arm and leg indices already swapped to match the SURREAL side
        LabelMap("fsitting14", _PARTS14, (
            (1,), (2,), (4,), (3,), (5,), (7,), (6,), (8,),
            (10,), (9,), (11,), (13,), (12,), (14,),
        ), 14),
        LabelMap("surreal6", _PARTS6, (
            (16,), _TORSO, (18, 20, 22, 24), (17, 19, 21, 23), (3, 6, 9, 12), (2, 5, 8, 11),
        ), 24),
        LabelMap("up6", _PARTS6, (
            (27, 28, 29, 30), (6, 7, 8, 19, 20, 21, 31), (14, 15, 16, 17, 18),
            (1, 2, 3, 4, 5), (22, 23, 24, 25, 26), (9, 10, 11, 12, 13),
        ), 31),
    )
}


def get_label_map(name: str | LabelMap) -> LabelMap:
    if isinstance(name, LabelMap):
        return name
    try:
        return LABEL_MAPS[name]
    except KeyError:
        raise ValueError(f"unknown label map {name!r}; choose from {sorted(LABEL_MAPS)}") from None


def remap_labels(mask, label_map: str | LabelMap) -> np.ndarray:
    """Translate source part labels to the shared target indices; 0 stays background."""
    m = get_label_map(label_map)
    a = np.asarray(mask)
    if not np.issubdtype(a.dtype, np.integer):
        raise ValueError("label mask must be an integer array")
    bad = np.unique(a[(a < 0) | (a > m.source_max)])
    if bad.size:
        raise ValueError(f"labels outside 0..{m.source_max} for {m.name}: {bad.tolist()}")
    return m.lut()[a].astype(a.dtype)
