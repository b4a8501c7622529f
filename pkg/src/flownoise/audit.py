"""Statistical checks that frames carry no single-frame structure.

A frame passes when each channel's 256-bin histogram is consistent with the
uniform law (chi-square below the critical value at the chosen significance)
and adjacent pixels are uncorrelated both horizontally and vertically. A
clip passes when enough of its frames do. These are necessary conditions
for looking like i.i.d. noise, not a proof that no learnable cue exists.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import chi2 as chi2_dist

from .errors import EmptyClip, FrameTooSmall

_MIN_SIDE = 32
_BINS = 256

DEFAULT_ALPHA = 0.01
DEFAULT_CORR_LIMIT = 0.05
DEFAULT_CLIP_THRESHOLD = 0.95


@dataclass(frozen=True)
class FrameAudit:
    chi_square: tuple[float, float, float]
    chi_square_critical: float
    corr_horizontal: float
    corr_vertical: float
    passed: bool
    fill_fraction: float | None = None


@dataclass(frozen=True)
class AuditReport:
    frames: list[FrameAudit] = field(repr=False)
    fraction_frames_passing: float
    threshold: float
    verdict: str  # "pass" | "fail"

    def to_json(self) -> str:
        records = [asdict(f) for f in self.frames]
        summary = {
            "frame_count": len(self.frames),
            "fraction_frames_passing": self.fraction_frames_passing,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }
        return json.dumps({"frames": records, "summary": summary}, indent=2)


def _channel_chi_square(channel: np.ndarray) -> float:
    counts = np.bincount(channel.ravel(), minlength=_BINS).astype(np.float64)
    expected = channel.size / _BINS
    return float(((counts - expected) ** 2 / expected).sum())


def _adjacent_correlation(a: np.ndarray, b: np.ndarray) -> float:
    x = a.ravel().astype(np.float64)
    y = b.ravel().astype(np.float64)
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def audit_frame(
    frame: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    corr_limit: float = DEFAULT_CORR_LIMIT,
) -> FrameAudit:
    """Compute per-frame uniformity and adjacency statistics.

    Frames below 32x32 are rejected: the chi-square test is underpowered
    with fewer than ~4 samples per bin.
    """
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3 or frame.dtype != np.uint8:
        raise ValueError(f"expected uint8 (H, W, 3) frame, got {frame.dtype} {frame.shape}")
    height, width = frame.shape[:2]
    if height < _MIN_SIDE or width < _MIN_SIDE:
        raise FrameTooSmall(f"frame must be at least {_MIN_SIDE}x{_MIN_SIDE}, got {width}x{height}")

    critical = float(chi2_dist.ppf(1.0 - alpha, _BINS - 1))
    chi = tuple(_channel_chi_square(frame[..., c]) for c in range(3))
    corr_h = float(np.mean([
        _adjacent_correlation(frame[:, :-1, c], frame[:, 1:, c]) for c in range(3)
    ]))
    corr_v = float(np.mean([
        _adjacent_correlation(frame[:-1, :, c], frame[1:, :, c]) for c in range(3)
    ]))
    passed = all(c < critical for c in chi) and abs(corr_h) < corr_limit and abs(corr_v) < corr_limit
    return FrameAudit(
        chi_square=chi,
        chi_square_critical=critical,
        corr_horizontal=corr_h,
        corr_vertical=corr_v,
        passed=passed,
    )


def audit_clip(
    frames: list[np.ndarray],
    threshold: float = DEFAULT_CLIP_THRESHOLD,
    alpha: float = DEFAULT_ALPHA,
    corr_limit: float = DEFAULT_CORR_LIMIT,
    fill_fractions: list[float | None] | None = None,
) -> AuditReport:
    """Audit every frame and aggregate to a clip verdict.

    fill_fractions, when given, annotates each frame's audit record with the
    share of pixels that were refilled during warping (diagnostic only).
    """
    if len(frames) == 0:
        raise EmptyClip("cannot audit an empty frame sequence")
    if fill_fractions is not None and len(fill_fractions) != len(frames):
        raise ValueError("fill_fractions length must match frames")
    audits = []
    for i, frame in enumerate(frames):
        record = audit_frame(frame, alpha=alpha, corr_limit=corr_limit)
        if fill_fractions is not None and fill_fractions[i] is not None:
            record = FrameAudit(
                chi_square=record.chi_square,
                chi_square_critical=record.chi_square_critical,
                corr_horizontal=record.corr_horizontal,
                corr_vertical=record.corr_vertical,
                passed=record.passed,
                fill_fraction=float(fill_fractions[i]),
            )
        audits.append(record)
    fraction = sum(a.passed for a in audits) / len(audits)
    return AuditReport(
        frames=audits,
        fraction_frames_passing=fraction,
        threshold=threshold,
        verdict="pass" if fraction >= threshold else "fail",
    )
