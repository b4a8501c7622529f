"""Deterministic generation of the initial dense noise frame.

Every byte is produced by hashing (seed, flat pixel/channel counter) with a
splitmix64-style mixer, so the frame is a pure function of its spec and any
subset of rows can be generated independently (or in parallel) with results
identical to a full-frame pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroDimension

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_ROUND_SALT = 0xD1B54A32D192ED03


@dataclass(frozen=True)
class NoiseSpec:
    width: int
    height: int
    seed: int
    channels: int = 3


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, vectorized over uint64 (wrapping arithmetic)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


def _noise_bytes(seed: int, start: int, stop: int) -> np.ndarray:
    counters = np.arange(start + 1, stop + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & _MASK64) + counters * np.uint64(_GAMMA)
        # one finalizer round leaves a histogram bias detectable at 50k
        # samples per channel; a salted second round measures clean
        mixed = _mix64(_mix64(state) ^ np.uint64(_ROUND_SALT))
    return (mixed >> np.uint64(56)).astype(np.uint8)


def _check_spec(spec: NoiseSpec) -> None:
    if spec.width < 1 or spec.height < 1:
        raise ZeroDimension(f"frame dimensions must be >= 1, got {spec.width}x{spec.height}")
    if spec.channels != 3:
        raise ValueError(f"channels is fixed at 3, got {spec.channels}")


def make_noise_frame(spec: NoiseSpec) -> np.ndarray:
    """Return the H x W x 3 uint8 frame determined by `spec`.

    Channel values are i.i.d. uniform over 0..255; the same spec always
    yields a bit-identical frame.
    """
    _check_spec(spec)
    return make_noise_rows(spec, 0, spec.height)


def make_noise_rows(spec: NoiseSpec, row_start: int, row_stop: int) -> np.ndarray:
    """Return rows [row_start, row_stop) of the frame `make_noise_frame(spec)` produces."""
    _check_spec(spec)
    if not 0 <= row_start <= row_stop <= spec.height:
        raise ValueError(f"row range [{row_start}, {row_stop}) outside 0..{spec.height}")
    per_row = spec.width * spec.channels
    raw = _noise_bytes(spec.seed, row_start * per_row, row_stop * per_row)
    return raw.reshape(row_stop - row_start, spec.width, spec.channels)
