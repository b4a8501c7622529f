"""Minimal .flo writer: little-endian magic tag, int32 width/height, then
row-major interleaved (u, v) float32 pairs. This byte layout is the
interchange contract with downstream consumers.
"""

from __future__ import annotations

import os

import numpy as np

FLO_MAGIC = np.float32(202021.25)


def flow_to_bytes(flow: np.ndarray) -> bytes:
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"expected (H, W, 2) flow, got shape {flow.shape}")
    height, width = flow.shape[:2]
    header = FLO_MAGIC.tobytes() + np.array([width, height], dtype="<i4").tobytes()
    return header + np.ascontiguousarray(flow, dtype="<f4").tobytes()


def write_flo_file(path: str | os.PathLike, flow: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(flow_to_bytes(flow))
