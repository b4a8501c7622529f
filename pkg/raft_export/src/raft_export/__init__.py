"""raft-export: pretrained RAFT inference to .flo files."""

__version__ = "0.1.0"

from .export import (
    COMPLETION_MARKER,
    ExportConfig,
    FrameCountTooSmall,
    MissingCheckpoint,
    export_flows,
    load_model,
)
from .flo import write_flo_file

__all__ = [
    "COMPLETION_MARKER",
    "ExportConfig",
    "FrameCountTooSmall",
    "MissingCheckpoint",
    "export_flows",
    "load_model",
    "write_flo_file",
]
