"""Command line entry point for flow export."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import ExportConfig, FrameCountTooSmall, MissingCheckpoint, export_flows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raft-export",
        description="Run a pretrained RAFT model over a frame directory and write .flo files.",
    )
    parser.add_argument("--input", required=True, help="directory of frame images, name-ordered")
    parser.add_argument("--output", required=True, help="directory for .flo files")
    parser.add_argument(
        "--checkpoint",
        default="raft_small",
        help="'raft_small', 'raft_large', or 'raft_small:/path/to/weights.pth'",
    )
    parser.add_argument("--upsampling", type=float, default=1.0,
                        help="upsample frames by this factor before inference")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--flow-updates", type=int, default=12,
                        help="RAFT refinement iterations per pair")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        frames_dir=Path(args.input),
        output_dir=Path(args.output),
        checkpoint=args.checkpoint,
        upsampling=args.upsampling,
        device=args.device,
        flow_updates=args.flow_updates,
    )
    try:
        written = export_flows(config)
    except (MissingCheckpoint, FrameCountTooSmall) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {written} flow files to {config.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
