"""Forward (splat) warping of noise frames along a flow field.

Each source pixel is pushed to the nearest destination pixel given its flow
vector. Destinations hit by several sources keep the value of the source
with the largest flow magnitude (occlusion overwrite); destinations hit by
none are refilled from the fill frame at the same coordinates, as are
border pixels whose would-be content left the frame. No value is ever
interpolated, so every output pixel is a verbatim copy from the previous
frame or the fill frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DimensionMismatch, NonFiniteFlow, UnknownFlowPresent
from .flow_io import UNKNOWN_THRESHOLD
from .noise import NoiseSpec, make_noise_frame


@dataclass(frozen=True)
class WarpStats:
    moved: int
    collisions: int
    deoccluded: int
    out_of_bounds: int


def _round_half_away(values: np.ndarray) -> np.ndarray:
    # np.round would round half to even; the contract is half away from zero
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def forward_warp(prev: np.ndarray, flow: np.ndarray, fill: np.ndarray) -> tuple[np.ndarray, WarpStats]:
    """Warp `prev` one step along `flow`, refilling gaps from `fill`.

    Collision rule: the source with the larger flow magnitude wins; exact
    ties go to the larger row-major source index. Returns the new frame and
    the per-step counters.
    """
    prev = np.asarray(prev)
    fill = np.asarray(fill)
    flow = np.asarray(flow)
    if prev.ndim != 3 or prev.shape[2] != 3:
        raise DimensionMismatch(f"expected (H, W, 3) frame, got {prev.shape}")
    height, width = prev.shape[:2]
    if height < 1 or width < 1:
        raise DimensionMismatch(f"frame must be at least 1x1, got {prev.shape}")
    if flow.shape != (height, width, 2):
        raise DimensionMismatch(f"flow shape {flow.shape} does not match frame {prev.shape}")
    if fill.shape != prev.shape:
        raise DimensionMismatch(f"fill shape {fill.shape} does not match frame {prev.shape}")
    if not np.isfinite(flow).all():
        raise NonFiniteFlow("flow contains NaN or Inf components")
    if np.abs(flow).max() > UNKNOWN_THRESHOLD:
        raise UnknownFlowPresent("flow contains unknown-marked components")

    u = flow[..., 0].astype(np.float64)
    v = flow[..., 1].astype(np.float64)
    dest_x = _round_half_away(np.arange(width, dtype=np.float64)[None, :] + u).astype(np.int64)
    dest_y = _round_half_away(np.arange(height, dtype=np.float64)[:, None] + v).astype(np.int64)

    in_bounds = (dest_x >= 0) & (dest_x < width) & (dest_y >= 0) & (dest_y < height)
    src = np.flatnonzero(in_bounds)
    dest = (dest_y * width + dest_x).ravel()[src]
    magnitude = (u * u + v * v).ravel()[src]

    # sort by (destination, magnitude, source index); the last entry of each
    # destination group is the winner under the collision rule
    order = np.lexsort((src, magnitude, dest))
    dest_sorted = dest[order]
    is_last = np.ones(dest_sorted.size, dtype=bool)
    is_last[:-1] = dest_sorted[1:] != dest_sorted[:-1]

    out = fill.copy()
    out_flat = out.reshape(-1, 3)
    out_flat[dest_sorted[is_last]] = prev.reshape(-1, 3)[src[order][is_last]]

    moved = int(is_last.sum())
    single_hits = 0
    if dest_sorted.size:
        is_first = np.ones(dest_sorted.size, dtype=bool)
        is_first[1:] = is_last[:-1]
        single_hits = int((is_first & is_last).sum())
    stats = WarpStats(
        moved=moved,
        collisions=moved - single_hits,
        deoccluded=height * width - moved,
        out_of_bounds=height * width - src.size,
    )
    return out, stats


def iter_warped_frames(
    flows: Iterable[np.ndarray], spec: NoiseSpec
) -> Iterator[tuple[np.ndarray, WarpStats | None]]:
    """Yield (frame, stats) along the warp chain; the seed frame has no stats."""
    base = make_noise_frame(spec)
    yield base, None
    current = base
    for flow in flows:
        current, stats = forward_warp(current, np.asarray(flow), base)
        yield current, stats


def generate_noise_clip(flows: Iterable[np.ndarray], spec: NoiseSpec) -> list[np.ndarray]:
    """Generate the noise clip driven by `flows`: T flows yield T+1 frames.

    Frame 0 is the seeded noise frame; each following frame warps its
    predecessor one flow step, refilling de-occlusions from frame 0. An
    empty flow sequence yields just the seed frame.
    """
    return [frame for frame, _ in iter_warped_frames(flows, spec)]
