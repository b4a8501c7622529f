"""flownoise: motion-only noise clips from ordinary videos.

Animate a seeded dense-noise frame with per-frame optical flow so the
result shows nothing in any single frame yet reveals the source motion
when played. Includes .flo file I/O and visualization, a classical flow
estimator, statistical auditing of generated frames, and confusion-matrix
class-subset selection.
"""

__version__ = "0.1.0"

from .audit import AuditReport, FrameAudit, audit_clip, audit_frame
from .errors import FlowNoiseError
from .estimate import HornSchunckParams, estimate_flow
from .flow_io import flow_to_color, read_flo, read_flo_file, write_flo, write_flo_file
from .noise import NoiseSpec, make_noise_frame, make_noise_rows
from .pipeline import ClipJob, ManifestRecord, PipelineConfig, run_batch, run_job
from .subset import ConfusionMatrix, SubsetResult, interclass_entropy, select_subset
from .warp import WarpStats, forward_warp, generate_noise_clip

__all__ = [
    "AuditReport",
    "ClipJob",
    "ConfusionMatrix",
    "FlowNoiseError",
    "FrameAudit",
    "HornSchunckParams",
    "ManifestRecord",
    "NoiseSpec",
    "PipelineConfig",
    "SubsetResult",
    "WarpStats",
    "audit_clip",
    "audit_frame",
    "estimate_flow",
    "flow_to_color",
    "forward_warp",
    "generate_noise_clip",
    "interclass_entropy",
    "make_noise_frame",
    "make_noise_rows",
    "read_flo",
    "read_flo_file",
    "run_batch",
    "run_job",
    "select_subset",
    "write_flo",
    "write_flo_file",
]
