"""Dense optical flow via coarse-to-fine Horn-Schunck.

A small self-contained estimator: luminance conversion, an image pyramid,
and Jacobi relaxation of the Horn-Schunck equations at each level. Meant
for desk-scale use; flow files from any external estimator can be fed to
the pipeline instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DegenerateInput, DimensionMismatch

# below this side length the data term is too starved to iterate on
_MIN_LEVEL_SIZE = 8

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class HornSchunckParams:
    alpha: float = 15.0
    iterations: int = 200
    pyramid_levels: int = 3
    pyramid_scale: float = 0.5

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.pyramid_levels < 1:
            raise ValueError(f"pyramid_levels must be >= 1, got {self.pyramid_levels}")
        if not 0.0 < self.pyramid_scale < 1.0:
            raise ValueError(f"pyramid_scale must be in (0, 1), got {self.pyramid_scale}")


def to_luminance(frame: np.ndarray) -> np.ndarray:
    """Collapse an (H, W, 3) frame to luminance on the 0..255 scale.

    The smoothness weight alpha is calibrated against 8-bit intensities
    (the conventional Horn-Schunck operating range), so luminance keeps
    that scale rather than being normalized to [0, 1].
    """
    frame = np.asarray(frame)
    if frame.ndim == 2:
        return frame.astype(np.float64)
    return frame[..., :3].astype(np.float64) @ _LUMA_WEIGHTS


def _resize_bilinear(image: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    src_h, src_w = image.shape
    dst_h, dst_w = shape
    ys = np.clip((np.arange(dst_h) + 0.5) * src_h / dst_h - 0.5, 0, src_h - 1)
    xs = np.clip((np.arange(dst_w) + 0.5) * src_w / dst_w - 0.5, 0, src_w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = image[np.ix_(y0, x0)] * (1 - fx) + image[np.ix_(y0, x1)] * fx
    bottom = image[np.ix_(y1, x0)] * (1 - fx) + image[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bottom * fy


def _neighbor_mean(field: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="edge")
    return 0.25 * (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:])


def _central_diff_x(image: np.ndarray) -> np.ndarray:
    padded = np.pad(image, ((0, 0), (1, 1)), mode="edge")
    return 0.5 * (padded[:, 2:] - padded[:, :-2])


def _central_diff_y(image: np.ndarray) -> np.ndarray:
    padded = np.pad(image, ((1, 1), (0, 0)), mode="edge")
    return 0.5 * (padded[2:, :] - padded[:-2, :])


def _solve_level(
    prev: np.ndarray,
    next_: np.ndarray,
    alpha: float,
    iterations: int,
    u: np.ndarray,
    v: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    ix = 0.5 * (_central_diff_x(prev) + _central_diff_x(next_))
    iy = 0.5 * (_central_diff_y(prev) + _central_diff_y(next_))
    it = next_ - prev
    denom = alpha * alpha + ix * ix + iy * iy
    for _ in range(iterations):
        u_bar = _neighbor_mean(u)
        v_bar = _neighbor_mean(v)
        shared = (ix * u_bar + iy * v_bar + it) / denom
        u = u_bar - ix * shared
        v = v_bar - iy * shared
    return u, v


def _pyramid(image: np.ndarray, levels: int, scale: float) -> list[np.ndarray]:
    out = [image]
    for _ in range(levels - 1):
        h, w = out[-1].shape
        nh = max(int(round(h * scale)), _MIN_LEVEL_SIZE)
        nw = max(int(round(w * scale)), _MIN_LEVEL_SIZE)
        if (nh, nw) == (h, w):
            break
        smoothed = gaussian_filter(out[-1], sigma=1.0, mode="nearest")
        out.append(_resize_bilinear(smoothed, (nh, nw)))
    return out


def estimate_flow(prev: np.ndarray, next_: np.ndarray, params: HornSchunckParams | None = None) -> np.ndarray:
    """Estimate per-pixel (u, v) displacement from `prev` to `next_`.

    Returns an (H, W, 2) float32 flow field. Pyramid depth shrinks
    automatically when the frames cannot support the requested number of
    levels; frames smaller than 8 px on a side are rejected.
    """
    if params is None:
        params = HornSchunckParams()
    prev = np.asarray(prev)
    next_ = np.asarray(next_)
    if prev.shape != next_.shape:
        raise DimensionMismatch(f"frame shapes differ: {prev.shape} vs {next_.shape}")
    lum_prev = to_luminance(prev)
    lum_next = to_luminance(next_)
    height, width = lum_prev.shape
    if height < _MIN_LEVEL_SIZE or width < _MIN_LEVEL_SIZE:
        raise DegenerateInput(f"frames must be at least {_MIN_LEVEL_SIZE} px per side, got {width}x{height}")

    pyr_prev = _pyramid(lum_prev, params.pyramid_levels, params.pyramid_scale)
    pyr_next = _pyramid(lum_next, params.pyramid_levels, params.pyramid_scale)

    u = np.zeros_like(pyr_prev[-1])
    v = np.zeros_like(pyr_prev[-1])
    for level in range(len(pyr_prev) - 1, -1, -1):
        target = pyr_prev[level].shape
        if u.shape != target:
            scale_y = target[0] / u.shape[0]
            scale_x = target[1] / u.shape[1]
            u = _resize_bilinear(u, target) * scale_x
            v = _resize_bilinear(v, target) * scale_y
        u, v = _solve_level(pyr_prev[level], pyr_next[level], params.alpha, params.iterations, u, v)
    return np.stack([u, v], axis=-1).astype(np.float32)
