"""Batch optical flow extraction with a pretrained RAFT model.

Loads frame pairs from a directory, runs inference only (the model is
never trained here), and writes one .flo file per adjacent pair plus a
completion marker. Frames may optionally be upsampled before inference;
the resulting flow is resized back and its values divided by the factor,
so output files are always in original-resolution pixel units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .flo import write_flo_file

FRAME_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

COMPLETION_MARKER = "export_complete.json"

_ARCHITECTURES = ("raft_small", "raft_large")


class MissingCheckpoint(Exception):
    pass


class FrameCountTooSmall(Exception):
    pass


@dataclass(frozen=True)
class ExportConfig:
    frames_dir: Path
    output_dir: Path
    checkpoint: str = "raft_small"  # architecture name, or "arch:/path/to/state_dict.pth"
    upsampling: float = 1.0
    device: str = "cpu"
    flow_updates: int = 12

    def __post_init__(self) -> None:
        if self.upsampling < 1.0:
            raise ValueError(f"upsampling factor must be >= 1, got {self.upsampling}")
        if self.flow_updates < 1:
            raise ValueError(f"flow_updates must be >= 1, got {self.flow_updates}")


def _parse_checkpoint(checkpoint: str) -> tuple[str, Path | None]:
    """Split a checkpoint identifier into (architecture, optional path)."""
    if ":" in checkpoint:
        arch, _, path = checkpoint.partition(":")
        if arch not in _ARCHITECTURES:
            raise MissingCheckpoint(f"unknown architecture {arch!r}, expected one of {_ARCHITECTURES}")
        return arch, Path(path)
    if checkpoint in _ARCHITECTURES:
        return checkpoint, None
    candidate = Path(checkpoint)
    if candidate.suffix in (".pth", ".pt") or candidate.exists():
        return "raft_small", candidate
    raise MissingCheckpoint(
        f"checkpoint {checkpoint!r} is neither a known architecture nor a weights file"
    )


def load_model(checkpoint: str, device: str = "cpu") -> torch.nn.Module:
    """Build RAFT and load weights per the checkpoint identifier.

    Identifiers: "raft_small" / "raft_large" pull the torchvision
    pretrained weights (requires them to be cached or downloadable);
    "raft_small:/path.pth" loads a local state dict into that architecture.
    """
    from torchvision.models import optical_flow as of

    arch, path = _parse_checkpoint(checkpoint)
    builder = of.raft_small if arch == "raft_small" else of.raft_large
    if path is not None:
        if not path.exists():
            raise MissingCheckpoint(f"weights file not found: {path}")
        model = builder(weights=None)
        state = torch.load(path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    else:
        weights = of.Raft_Small_Weights.DEFAULT if arch == "raft_small" else of.Raft_Large_Weights.DEFAULT
        try:
            model = builder(weights=weights, progress=False)
        except Exception as exc:  # hub download failed or cache missing
            raise MissingCheckpoint(
                f"pretrained weights for {arch} unavailable (no cache, download failed): {exc}"
            ) from exc
    model.eval()
    return model.to(torch.device(device))


def list_frame_files(directory: Path) -> list[Path]:
    files = [p for p in Path(directory).iterdir() if p.suffix.lower() in FRAME_EXTENSIONS]
    return sorted(files, key=lambda p: p.name)


def _load_frame_tensor(path: Path) -> torch.Tensor:
    with Image.open(path) as img:
        array = np.asarray(img.convert("RGB"), dtype=np.float32)
    # RAFT expects batched channel-first images normalized to [-1, 1]
    tensor = torch.from_numpy(array).permute(2, 0, 1).unsqueeze(0)
    return tensor / 255.0 * 2.0 - 1.0


def _pad_to_multiple_of_eight(tensor: torch.Tensor) -> tuple[torch.Tensor, tuple[int, int]]:
    height, width = tensor.shape[-2:]
    pad_h = (-height) % 8
    pad_w = (-width) % 8
    if pad_h or pad_w:
        tensor = F.pad(tensor, (0, pad_w, 0, pad_h), mode="replicate")
    return tensor, (pad_h, pad_w)


@torch.no_grad()
def _flow_for_pair(
    model: torch.nn.Module,
    first: torch.Tensor,
    second: torch.Tensor,
    upsampling: float,
    flow_updates: int,
) -> np.ndarray:
    height, width = first.shape[-2:]
    if upsampling != 1.0:
        first = F.interpolate(first, scale_factor=upsampling, mode="bilinear", align_corners=False)
        second = F.interpolate(second, scale_factor=upsampling, mode="bilinear", align_corners=False)
    first, pads = _pad_to_multiple_of_eight(first)
    second, _ = _pad_to_multiple_of_eight(second)
    flow = model(first, second, num_flow_updates=flow_updates)[-1]
    pad_h, pad_w = pads
    if pad_h:
        flow = flow[..., :-pad_h, :]
    if pad_w:
        flow = flow[..., :, :-pad_w]
    if upsampling != 1.0:
        flow = F.interpolate(flow, size=(height, width), mode="bilinear", align_corners=False)
        flow = flow / upsampling
    return flow[0].permute(1, 2, 0).cpu().numpy().astype(np.float32)


def export_flows(config: ExportConfig) -> int:
    """Write one .flo per adjacent frame pair; returns the file count."""
    frame_files = list_frame_files(config.frames_dir)
    if len(frame_files) < 2:
        raise FrameCountTooSmall(
            f"{config.frames_dir} holds {len(frame_files)} frames, need at least 2"
        )
    model = load_model(config.checkpoint, config.device)
    device = torch.device(config.device)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    previous = _load_frame_tensor(frame_files[0]).to(device)
    written = 0
    for index in range(1, len(frame_files)):
        current = _load_frame_tensor(frame_files[index]).to(device)
        if current.shape != previous.shape:
            raise ValueError(
                f"{frame_files[index].name} differs in size from {frame_files[index - 1].name}"
            )
        flow = _flow_for_pair(model, previous, current, config.upsampling, config.flow_updates)
        write_flo_file(out_dir / f"flow_{index - 1:05d}.flo", flow)
        written += 1
        previous = current

    marker = {
        "flow_files": written,
        "frames": len(frame_files),
        "checkpoint": config.checkpoint,
        "upsampling": config.upsampling,
        "flow_updates": config.flow_updates,
    }
    (out_dir / COMPLETION_MARKER).write_text(json.dumps(marker, indent=2))
    return written
