"""Batch orchestration: frames in, noise clips + audit + manifest out.

A job names a directory of frame images and a flow source (a directory of
.flo files or the built-in estimator), and produces losslessly stored noise
frames, an audit report, optional flow visualizations, and a manifest
record carrying everything needed to regenerate the outputs bit-exactly.
Jobs in a batch fail independently; the manifest records every attempt.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .audit import DEFAULT_ALPHA, DEFAULT_CLIP_THRESHOLD, DEFAULT_CORR_LIMIT, audit_clip
from .errors import DimensionMismatch, DuplicateClipId, FlowNoiseError
from .estimate import HornSchunckParams, estimate_flow
from .flow_io import flow_to_color, read_flo_file
from .noise import NoiseSpec
from .warp import WarpStats, iter_warped_frames

ESTIMATE_FLOW_SOURCE = "estimate"

FRAME_EXTENSIONS = (".png", ".bmp", ".tif", ".tiff")

MANIFEST_NAME = "manifest.jsonl"


@dataclass(frozen=True)
class PipelineConfig:
    hs_params: HornSchunckParams = field(default_factory=HornSchunckParams)
    audit_alpha: float = DEFAULT_ALPHA
    audit_corr_limit: float = DEFAULT_CORR_LIMIT
    clip_threshold: float = DEFAULT_CLIP_THRESHOLD
    write_visualizations: bool = False
    viz_max_magnitude: float | None = None

    def snapshot(self) -> dict:
        return {
            "alpha": self.hs_params.alpha,
            "iterations": self.hs_params.iterations,
            "pyramid_levels": self.hs_params.pyramid_levels,
            "pyramid_scale": self.hs_params.pyramid_scale,
            "audit_alpha": self.audit_alpha,
            "audit_corr_limit": self.audit_corr_limit,
            "clip_threshold": self.clip_threshold,
            "write_visualizations": self.write_visualizations,
            "viz_max_magnitude": self.viz_max_magnitude,
        }


@dataclass(frozen=True)
class ClipJob:
    clip_id: str
    frames_dir: Path
    flow_source: str | Path  # directory of .flo files, or "estimate"
    output_dir: Path
    seed: int | None = None  # derived from (batch_seed, clip_id) when absent


@dataclass
class ManifestRecord:
    clip_id: str
    status: str  # "ok" | "error"
    seed: int | None = None
    flow_source: str = ""
    frame_count: int = 0
    width: int = 0
    height: int = 0
    digest: str = ""
    warp_stats: dict | None = None
    audit_verdict: str = ""
    audit_fraction: float = 0.0
    tool_version: str = __version__
    params: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ManifestRecord":
        return cls(**json.loads(line))


def derive_clip_seed(batch_seed: int, clip_id: str) -> int:
    """Stable per-clip seed; adding clips to a batch never shifts the others."""
    digest = hashlib.sha256(
        batch_seed.to_bytes(8, "big", signed=False) + clip_id.encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def load_frame(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def save_frame(path: Path, frame: np.ndarray) -> None:
    Image.fromarray(frame, mode="RGB").save(path, format="PNG")


def list_frame_files(directory: Path) -> list[Path]:
    files = [p for p in directory.iterdir() if p.suffix.lower() in FRAME_EXTENSIONS]
    return sorted(files, key=lambda p: p.name)


def digest_frames(frames: list[np.ndarray]) -> str:
    """SHA-256 over frame count, dimensions, and raw pixel bytes in order."""
    hasher = hashlib.sha256()
    height, width = frames[0].shape[:2]
    hasher.update(f"{len(frames)}:{height}:{width}:3".encode("ascii"))
    for frame in frames:
        hasher.update(np.ascontiguousarray(frame, dtype=np.uint8).tobytes())
    return hasher.hexdigest()


def digest_output_dir(directory: Path) -> str | None:
    files = sorted(directory.glob("frame_*.png"), key=lambda p: p.name)
    if not files:
        return None
    return digest_frames([load_frame(p) for p in files])


def _load_flows(flow_dir: Path, frame_count: int, height: int, width: int) -> list[np.ndarray]:
    files = sorted(flow_dir.glob("*.flo"), key=lambda p: p.name)
    if len(files) != frame_count - 1:
        raise FlowNoiseError(
            f"{flow_dir} holds {len(files)} .flo files, expected {frame_count - 1}"
        )
    flows = []
    for path in files:
        flow = read_flo_file(path)
        if flow.shape[:2] != (height, width):
            raise DimensionMismatch(
                f"{path.name} is {flow.shape[1]}x{flow.shape[0]}, frames are {width}x{height}"
            )
        flows.append(flow)
    return flows


def _aggregate_stats(stats: list[WarpStats]) -> dict:
    return {
        "moved": sum(s.moved for s in stats),
        "collisions": sum(s.collisions for s in stats),
        "deoccluded": sum(s.deoccluded for s in stats),
        "out_of_bounds": sum(s.out_of_bounds for s in stats),
    }


def run_job(job: ClipJob, config: PipelineConfig | None = None, batch_seed: int = 0) -> ManifestRecord:
    """Execute one clip generation job and return its manifest record.

    Failures are captured in the record (status "error") rather than
    raised, so batches keep going past broken clips.
    """
    if config is None:
        config = PipelineConfig()
    seed = job.seed if job.seed is not None else derive_clip_seed(batch_seed, job.clip_id)
    record = ManifestRecord(
        clip_id=job.clip_id,
        status="error",
        seed=seed,
        flow_source=str(job.flow_source),
        params=config.snapshot(),
    )
    try:
        frame_files = list_frame_files(Path(job.frames_dir))
        if not frame_files:
            raise FlowNoiseError(f"no frame images found in {job.frames_dir}")
        input_frames = [load_frame(p) for p in frame_files]
        height, width = input_frames[0].shape[:2]
        for path, frame in zip(frame_files, input_frames):
            if frame.shape[:2] != (height, width):
                raise DimensionMismatch(f"{path.name} differs in size from the first frame")

        if str(job.flow_source) == ESTIMATE_FLOW_SOURCE:
            flows = [
                estimate_flow(input_frames[i], input_frames[i + 1], config.hs_params)
                for i in range(len(input_frames) - 1)
            ]
        else:
            flows = _load_flows(Path(job.flow_source), len(input_frames), height, width)

        out_dir = Path(job.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        spec = NoiseSpec(width=width, height=height, seed=seed)
        frames: list[np.ndarray] = []
        stats: list[WarpStats] = []
        for index, (frame, step_stats) in enumerate(iter_warped_frames(flows, spec)):
            save_frame(out_dir / f"frame_{index:05d}.png", frame)
            frames.append(frame)
            if step_stats is not None:
                stats.append(step_stats)

        if config.write_visualizations and flows:
            viz_dir = out_dir / "flow_viz"
            viz_dir.mkdir(exist_ok=True)
            for index, flow in enumerate(flows):
                save_frame(
                    viz_dir / f"flow_{index:05d}.png",
                    flow_to_color(flow, config.viz_max_magnitude),
                )

        total = height * width
        fill_fractions: list[float | None] = [0.0] + [s.deoccluded / total for s in stats]
        report = audit_clip(
            frames,
            threshold=config.clip_threshold,
            alpha=config.audit_alpha,
            corr_limit=config.audit_corr_limit,
            fill_fractions=fill_fractions,
        )
        (out_dir / "audit.json").write_text(report.to_json())

        record.status = "ok"
        record.frame_count = len(frames)
        record.width = width
        record.height = height
        record.digest = digest_frames(frames)
        record.warp_stats = _aggregate_stats(stats)
        record.audit_verdict = report.verdict
        record.audit_fraction = report.fraction_frames_passing
    except Exception as exc:  # noqa: BLE001 - per-clip containment is the contract
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def load_manifest(path: Path) -> dict[str, ManifestRecord]:
    """Read a manifest file into {clip_id: latest record}."""
    records: dict[str, ManifestRecord] = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                record = ManifestRecord.from_json(line)
                records[record.clip_id] = record
    return records


def run_batch(
    jobs: list[ClipJob],
    workers: int = 1,
    config: PipelineConfig | None = None,
    batch_seed: int = 0,
    manifest_path: Path | None = None,
) -> list[ManifestRecord]:
    """Run jobs with bounded parallelism, appending records to the manifest.

    Jobs whose clip_id already has an "ok" manifest record and whose outputs
    on disk still match the recorded digest are skipped. Returns one record
    per input job, in input order.
    """
    ids = [job.clip_id for job in jobs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateClipId(f"duplicate clip ids in batch: {dupes}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    existing: dict[str, ManifestRecord] = {}
    if manifest_path is not None:
        existing = load_manifest(manifest_path)

    results: dict[str, ManifestRecord] = {}
    pending: list[ClipJob] = []
    for job in jobs:
        previous = existing.get(job.clip_id)
        if (
            previous is not None
            and previous.status == "ok"
            and digest_output_dir(Path(job.output_dir)) == previous.digest
        ):
            results[job.clip_id] = previous
        else:
            pending.append(job)

    write_lock = threading.Lock()

    def execute(job: ClipJob) -> None:
        record = run_job(job, config=config, batch_seed=batch_seed)
        with write_lock:
            results[job.clip_id] = record
            if manifest_path is not None:
                manifest_path.parent.mkdir(parents=True, exist_ok=True)
                with open(manifest_path, "a") as fh:
                    fh.write(record.to_json() + "\n")

    if pending:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(execute, pending))

    return [results[job.clip_id] for job in jobs]
