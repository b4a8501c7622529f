"""Command line interface.

Subcommands:
  gen     walk a tree of clip directories and generate noise clips
  flow    estimate optical flow for one frame directory, write .flo files
  viz     render .flo files as color images
  audit   run the statistical audit over a directory of frames
  subset  select a maximally-confused class subset from a confusion CSV
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import DEFAULT_ALPHA, DEFAULT_CLIP_THRESHOLD, DEFAULT_CORR_LIMIT, audit_clip
from .errors import FlowNoiseError
from .estimate import HornSchunckParams, estimate_flow
from .flow_io import flow_to_color, read_flo_file, write_flo_file
from .pipeline import (
    ESTIMATE_FLOW_SOURCE,
    MANIFEST_NAME,
    ClipJob,
    PipelineConfig,
    list_frame_files,
    load_frame,
    run_batch,
    save_frame,
)
from .subset import ConfusionMatrix, select_subset


def _add_hs_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=15.0, help="smoothness weight")
    parser.add_argument("--iterations", type=int, default=200, help="relaxation iterations per level")
    parser.add_argument("--pyramid-levels", type=int, default=3)
    parser.add_argument("--pyramid-scale", type=float, default=0.5)


def _hs_params(args: argparse.Namespace) -> HornSchunckParams:
    return HornSchunckParams(
        alpha=args.alpha,
        iterations=args.iterations,
        pyramid_levels=args.pyramid_levels,
        pyramid_scale=args.pyramid_scale,
    )


def _cmd_gen(args: argparse.Namespace) -> int:
    input_root = Path(args.input)
    output_root = Path(args.output)
    clip_dirs = sorted((p for p in input_root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not clip_dirs:
        print(f"no clip directories under {input_root}", file=sys.stderr)
        return 1

    jobs = []
    for clip_dir in clip_dirs:
        if args.flow == ESTIMATE_FLOW_SOURCE:
            flow_source: str | Path = ESTIMATE_FLOW_SOURCE
        else:
            flow_source = Path(args.flow) / clip_dir.name
        jobs.append(
            ClipJob(
                clip_id=clip_dir.name,
                frames_dir=clip_dir,
                flow_source=flow_source,
                output_dir=output_root / clip_dir.name,
            )
        )
    config = PipelineConfig(
        hs_params=_hs_params(args),
        write_visualizations=args.viz,
    )
    records = run_batch(
        jobs,
        workers=args.workers,
        config=config,
        batch_seed=args.seed,
        manifest_path=output_root / MANIFEST_NAME,
    )
    failed = [r for r in records if r.status != "ok"]
    for record in records:
        line = f"{record.clip_id}: {record.status}"
        if record.status == "ok":
            line += f" ({record.frame_count} frames, audit {record.audit_verdict})"
        else:
            line += f" ({record.error})"
        print(line)
    return 1 if failed else 0


def _cmd_flow(args: argparse.Namespace) -> int:
    frames = [load_frame(p) for p in list_frame_files(Path(args.input))]
    if len(frames) < 2:
        print("need at least 2 frames to estimate flow", file=sys.stderr)
        return 1
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = _hs_params(args)
    for i in range(len(frames) - 1):
        flow = estimate_flow(frames[i], frames[i + 1], params)
        write_flo_file(out_dir / f"flow_{i:05d}.flo", flow)
    print(f"wrote {len(frames) - 1} flow files to {out_dir}")
    return 0


def _cmd_viz(args: argparse.Namespace) -> int:
    source = Path(args.input)
    flo_files = [source] if source.is_file() else sorted(source.glob("*.flo"), key=lambda p: p.name)
    if not flo_files:
        print(f"no .flo files at {source}", file=sys.stderr)
        return 1
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in flo_files:
        image = flow_to_color(read_flo_file(path), args.max_magnitude)
        save_frame(out_dir / (path.stem + ".png"), image)
    print(f"wrote {len(flo_files)} images to {out_dir}")
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    frames = [load_frame(p) for p in list_frame_files(Path(args.input))]
    if not frames:
        print(f"no frames under {args.input}", file=sys.stderr)
        return 1
    report = audit_clip(
        frames,
        threshold=args.clip_threshold,
        alpha=args.alpha,
        corr_limit=args.corr,
    )
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text)
    print(
        f"audit: {report.verdict} "
        f"({report.fraction_frames_passing:.3f} of frames pass, threshold {report.threshold})",
        file=sys.stderr,
    )
    return 0


def _cmd_subset(args: argparse.Namespace) -> int:
    matrix = ConfusionMatrix.from_csv_text(Path(args.input).read_text())
    result = select_subset(matrix, k_sub=args.k, min_accuracy=args.min_accuracy)
    payload = {
        "selected_labels": [matrix.labels[i] for i in result.selected],
        "selected_indices": list(result.selected),
        "score": result.score,
        "permutation": list(result.permutation),
        "permutation_labels": [matrix.labels[i] for i in result.permutation],
    }
    print(json.dumps(payload, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flownoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate noise clips for a tree of frame directories")
    p_gen.add_argument("--input", required=True, help="root directory; one subdirectory per clip")
    p_gen.add_argument("--output", required=True, help="output root; one subdirectory per clip")
    p_gen.add_argument(
        "--flow",
        default=ESTIMATE_FLOW_SOURCE,
        help="'estimate' or a root directory of per-clip .flo subdirectories",
    )
    p_gen.add_argument("--seed", type=int, default=0, help="batch seed; per-clip seeds derive from it")
    p_gen.add_argument("--workers", type=int, default=1)
    p_gen.add_argument("--viz", action="store_true", help="also write flow visualizations")
    _add_hs_flags(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    p_flow = sub.add_parser("flow", help="estimate flow for a frame directory and write .flo files")
    p_flow.add_argument("--input", required=True)
    p_flow.add_argument("--output", required=True)
    _add_hs_flags(p_flow)
    p_flow.set_defaults(func=_cmd_flow)

    p_viz = sub.add_parser("viz", help="render .flo files as color images")
    p_viz.add_argument("--input", required=True, help=".flo file or directory of .flo files")
    p_viz.add_argument("--output", required=True)
    p_viz.add_argument("--max-magnitude", type=float, default=None)
    p_viz.set_defaults(func=_cmd_viz)

    p_audit = sub.add_parser("audit", help="audit a directory of frames")
    p_audit.add_argument("--input", required=True)
    p_audit.add_argument("--output", default=None, help="write the JSON report here instead of stdout")
    p_audit.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p_audit.add_argument("--corr", type=float, default=DEFAULT_CORR_LIMIT)
    p_audit.add_argument("--clip-threshold", type=float, default=DEFAULT_CLIP_THRESHOLD)
    p_audit.set_defaults(func=_cmd_audit)

    p_subset = sub.add_parser("subset", help="select a class subset from a confusion-matrix CSV")
    p_subset.add_argument("--input", required=True)
    p_subset.add_argument("--k", type=int, required=True)
    p_subset.add_argument("--min-accuracy", type=float, default=0.5)
    p_subset.set_defaults(func=_cmd_subset)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FlowNoiseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
