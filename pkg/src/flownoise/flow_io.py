"""Bit-exact reading/writing of .flo flow files and flow visualization.

The binary layout is the common little-endian one: a float32 tag 202021.25,
int32 width, int32 height, then height*width*2 float32 (u, v) pairs in
row-major order. Reading and writing are exact inverses at the byte level;
values are never normalized or clamped.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import (
    BadMagic,
    NonPositiveDims,
    OversizeDims,
    TruncatedPayload,
    UnknownFlowPresent,
)

FLO_MAGIC = np.float32(202021.25)

# components with magnitude above this are "unknown" markers, not real flow
UNKNOWN_THRESHOLD = 1e9

DEFAULT_DIM_CAP = 99999

_HEADER_BYTES = 12


def has_unknown(flow: np.ndarray) -> bool:
    """True if any component is sentinel-marked or non-finite."""
    return bool((~np.isfinite(flow)).any() or (np.abs(flow) > UNKNOWN_THRESHOLD).any())


def read_flo(data: bytes, *, allow_unknown: bool = False, max_dim: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Decode a .flo byte sequence into an (H, W, 2) float32 array.

    Values come back bit-identical to what is stored. Components marked
    unknown (|value| > 1e9) are rejected unless allow_unknown is set.
    """
    if len(data) < 4:
        raise TruncatedPayload(f"need at least 4 bytes for the magic tag, got {len(data)}")
    magic = np.frombuffer(data, dtype="<f4", count=1)[0]
    if not magic == FLO_MAGIC:
        raise BadMagic(f"first word is {magic!r}, expected {float(FLO_MAGIC)}")
    if len(data) < _HEADER_BYTES:
        raise TruncatedPayload(f"need at least {_HEADER_BYTES} header bytes, got {len(data)}")
    width, height = (int(x) for x in np.frombuffer(data, dtype="<i4", count=2, offset=4))
    if width <= 0 or height <= 0:
        raise NonPositiveDims(f"header declares {width}x{height}")
    if width > max_dim or height > max_dim:
        raise OversizeDims(f"header declares {width}x{height}, cap is {max_dim}")
    expected = _HEADER_BYTES + width * height * 8
    if len(data) < expected:
        raise TruncatedPayload(f"header implies {expected} bytes, got {len(data)}")
    payload = np.frombuffer(data, dtype="<f4", count=width * height * 2, offset=_HEADER_BYTES)
    flow = payload.reshape(height, width, 2).copy()
    if not allow_unknown and has_unknown(flow):
        raise UnknownFlowPresent("flow contains unknown-marked components")
    return flow


def write_flo(flow: np.ndarray) -> bytes:
    """Encode an (H, W, 2) flow array as .flo bytes; inverse of read_flo."""
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"expected (H, W, 2) flow, got shape {flow.shape}")
    height, width = flow.shape[:2]
    if width < 1 or height < 1:
        raise NonPositiveDims(f"flow is {width}x{height}")
    header = FLO_MAGIC.tobytes() + np.array([width, height], dtype="<i4").tobytes()
    return header + np.ascontiguousarray(flow, dtype="<f4").tobytes()


def read_flo_file(path: str | os.PathLike, **kwargs) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_flo(fh.read(), **kwargs)


def write_flo_file(path: str | os.PathLike, flow: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(write_flo(flow))


def make_color_wheel() -> np.ndarray:
    """55-entry RGB wheel: six linearly ramped segments RY/YG/GC/CB/BM/MR."""
    ry, yg, gc, cb, bm, mr = 15, 6, 4, 11, 13, 6
    wheel = np.zeros((ry + yg + gc + cb + bm + mr, 3))
    col = 0
    wheel[col:col + ry, 0] = 255
    wheel[col:col + ry, 1] = np.floor(255 * np.arange(ry) / ry)
    col += ry
    wheel[col:col + yg, 0] = 255 - np.floor(255 * np.arange(yg) / yg)
    wheel[col:col + yg, 1] = 255
    col += yg
    wheel[col:col + gc, 1] = 255
    wheel[col:col + gc, 2] = np.floor(255 * np.arange(gc) / gc)
    col += gc
    wheel[col:col + cb, 1] = 255 - np.floor(255 * np.arange(cb) / cb)
    wheel[col:col + cb, 2] = 255
    col += cb
    wheel[col:col + bm, 2] = 255
    wheel[col:col + bm, 0] = np.floor(255 * np.arange(bm) / bm)
    col += bm
    wheel[col:col + mr, 2] = 255 - np.floor(255 * np.arange(mr) / mr)
    wheel[col:col + mr, 0] = 255
    return wheel


_WHEEL = make_color_wheel()


def flow_to_color(flow: np.ndarray, max_magnitude: float | None = None) -> np.ndarray:
    """Render a flow field as an (H, W, 3) uint8 image.

    Hue encodes the angle atan2(-v, -u) on the 55-entry wheel, saturation
    the magnitude relative to max_magnitude (defaults to the field's own
    maximum, floored at 1e-6). Zero flow renders near-white; magnitudes
    beyond max_magnitude are darkened to mark them out of range.
    """
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"expected (H, W, 2) flow, got shape {flow.shape}")
    if has_unknown(flow):
        raise UnknownFlowPresent("cannot colorize unknown-marked flow")
    u = flow[..., 0]
    v = flow[..., 1]
    rad = np.sqrt(u * u + v * v)
    if max_magnitude is None:
        max_magnitude = float(rad.max())
    norm = max(float(max_magnitude), 1e-6)
    rad = rad / norm

    ncols = _WHEEL.shape[0]
    angle = np.arctan2(-v, -u) / np.pi
    fk = (angle + 1.0) / 2.0 * (ncols - 1)
    k0 = np.floor(fk).astype(np.int64)
    k1 = (k0 + 1) % ncols
    f = fk - k0

    image = np.zeros(flow.shape[:2] + (3,), dtype=np.uint8)
    in_range = rad <= 1.0
    for c in range(3):
        col0 = _WHEEL[k0, c] / 255.0
        col1 = _WHEEL[k1, c] / 255.0
        col = (1.0 - f) * col0 + f * col1
        col = np.where(in_range, 1.0 - rad * (1.0 - col), col * 0.75)
        image[..., c] = np.floor(255.0 * col).astype(np.uint8)
    return image
