"""
panowarp command-line front-end.

Every subcommand builds the same pydantic input model the MCP tools take, runs
the shared runner, prints the report on stdout and maps failures to exit codes
(0 ok, 2 validation, 3 backend failure, 4 step too large, 1 anything else).
Progress goes to stderr.
"""
import argparse
import asyncio
import sys
from typing import Any, Callable, Dict, List, Optional

from . import instances
from .config import load_settings
from .errors import EXIT_OK, exit_code_for
from .handlers import (
    run_c2e, run_dataset, run_e2c, run_inpaint, run_mvp, run_pipeline, run_pnvi, run_stats, run_warp
)
from .models import (
    C2EInput, DatasetInput, DepthFormat, E2CInput, InpaintInput, MvpInput, PipelineInput, PnviInput,
    PnviStrategy, PoseConvention, ResponseFormat, StatsInput, WarpInput
)
from .utils import ResponseFormatter, handle_error


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")

# ==================== PARSER ====================

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="panowarp", formatter_class=fmt,
                                     description="Panoramic novel-view synthesis geometry engine.")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap for warp chunks, view extraction and dataset workers "
                             "(default: PANOWARP_THREADS or CPU count)")
    parser.add_argument("--backend-timeout-sec", type=float, default=None,
                        help="timeout for external/HTTP inpainting backends (default 120)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines on stderr")
    parser.add_argument("--json", action="store_true", help="print reports as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("warp", formatter_class=fmt, help="forward-warp a panorama to a new translation")
    p.add_argument("--image", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--pose", required=True, help="target translation 'x,y,z' in meters")
    p.add_argument("--out-prefix", "--out", required=True, dest="out_prefix",
                   help="output prefix: <prefix>.png, <prefix>.pfm, <prefix>.mask.png")
    p.add_argument("--depth-format", choices=[f.value for f in DepthFormat], default="pfm")
    p.add_argument("--flip-v", action="store_true", help="inputs are stored bottom-up")
    p.add_argument("--benchmark", action="store_true", help="also time the warp at 1, 2, 4 and N threads")

    p = sub.add_parser("stats", formatter_class=fmt, help="hole ratio of a mask, or a per-axis sweep")
    p.add_argument("--mask", default=None)
    p.add_argument("--sweep", action="store_true", help="sweep mode (needs --image and --depth)")
    p.add_argument("--image", default=None)
    p.add_argument("--depth", default=None)
    p.add_argument("--axis", default="x", choices=["x", "y", "z"])
    p.add_argument("--distances", type=_floats, default=None,
                   help="meters; default 0.33,0.27,0.21,0.15,0.09,0.03,-0.02 (use --distances=... for a leading minus)")
    p.add_argument("--depth-format", choices=[f.value for f in DepthFormat], default="pfm")

    p = sub.add_parser("e2c", formatter_class=fmt, help="equirectangular -> six cubemap faces")
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--face-size", type=int, default=512)
    p.add_argument("--mask", action="store_true", help="input is a binary hole mask")

    p = sub.add_parser("c2e", formatter_class=fmt, help="six cubemap faces -> equirectangular")
    p.add_argument("--in-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--mask", action="store_true", help="faces are binary hole masks")

    p = sub.add_parser("inpaint", formatter_class=fmt, help="fill the holes of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", default=None, help="constant | pullpush | external:<cmd> | http(s)://... "
                                                   "(default: PANOWARP_BACKEND or pullpush)")

    p = sub.add_parser("pnvi", formatter_class=fmt, help="progressive novel view inpainting to one pose")
    p.add_argument("--image", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--target", required=True, help="target translation 'x,y,z' in meters")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--step", type=float, default=0.02)
    p.add_argument("--backend", default=None, help="inpainting backend id (default: PANOWARP_BACKEND or pullpush)")
    p.add_argument("--strategy", choices=[s.value for s in PnviStrategy], default="progressive")
    p.add_argument("--face-size", type=int, default=512)
    p.add_argument("--max-hole-ratio", type=float, default=0.30)
    p.add_argument("--keep-intermediate", action="store_true")
    p.add_argument("--depth-format", choices=[f.value for f in DepthFormat], default="pfm")
    p.add_argument("--depth-hook", default=None, help="command run as <cmd> --image in.png --out out.pfm")
    p.add_argument("--flip-v", action="store_true")
    p.add_argument("--overwrite", action="store_true")

    p = sub.add_parser("mvp", formatter_class=fmt, help="perspective views + sparse model export")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--layout", default="cube6+ring8")
    p.add_argument("--fov", type=float, default=90.0)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--stride", type=int, default=4)
    p.add_argument("--pose-convention", choices=[c.value for c in PoseConvention], default="w2c")
    p.add_argument("--images-only", action="store_true", help="skip poses and points; write images and cameras.txt")
    p.add_argument("--overwrite", action="store_true")

    p = sub.add_parser("dataset", formatter_class=fmt, help="synthesize the spherical mask dataset")
    p.add_argument("--list", required=True, dest="list_path", help="file with one '<image> <depth>' pair per line")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--units", type=_floats, default=[0.02, 0.04])
    p.add_argument("--directions", default="default8", help="default8 | axes6 | 'x,y,z;x,y,z;...'")
    p.add_argument("--face-size", type=int, default=512)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--depth-format", choices=[f.value for f in DepthFormat], default="pfm")
    p.add_argument("--overwrite", action="store_true")

    p = sub.add_parser("pipeline", formatter_class=fmt, help="PNVI over a pose set, then sparse-model export")
    p.add_argument("--config", required=True, help="pipeline JSON config")
    p.add_argument("--dry-run", action="store_true", help="print the plan without writing")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--backend", default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--strategy", choices=[s.value for s in PnviStrategy], default=None)
    p.add_argument("--max-hole-ratio", type=float, default=None)
    p.add_argument("--keep-intermediate", action="store_true", default=None)
    p.add_argument("--overwrite", action="store_true", default=None)

    sub.add_parser("serve", formatter_class=fmt, help="serve every command as an MCP tool over stdio")
    return parser

# ==================== DISPATCH ====================

def _backend(args) -> str:
    if args.backend:
        return args.backend
    return instances.settings.backend if instances.settings else "pullpush"


def _build(args) -> Callable[[], Any]:
    """Validate arguments into an input model; returns the call that runs it."""
    c = args.command
    if c == "warp":
        params = WarpInput(image=args.image, depth=args.depth, pose=args.pose, out_prefix=args.out_prefix,
                           depth_format=args.depth_format, flip_v=args.flip_v, threads=args.threads,
                           benchmark=args.benchmark)
        return lambda: run_warp(params)
    if c == "stats":
        extra: Dict[str, Any] = {}
        if args.distances is not None:
            extra["distances"] = args.distances
        params = StatsInput(mask=args.mask, image=args.image, depth=args.depth, axis=args.axis,
                            depth_format=args.depth_format, **extra)
        return lambda: run_stats(params)
    if c == "e2c":
        params = E2CInput(input=args.input, out_dir=args.out_dir, face_size=args.face_size, mask=args.mask)
        return lambda: run_e2c(params)
    if c == "c2e":
        params = C2EInput(in_dir=args.in_dir, out=args.out, width=args.width, mask=args.mask)
        return lambda: run_c2e(params)
    if c == "inpaint":
        params = InpaintInput(image=args.image, mask=args.mask, out=args.out, backend=_backend(args),
                              timeout_sec=args.backend_timeout_sec)
        return lambda: asyncio.run(run_inpaint(params))
    if c == "pnvi":
        params = PnviInput(image=args.image, depth=args.depth, target=args.target, out_dir=args.out_dir,
                           step=args.step, backend=_backend(args), strategy=args.strategy,
                           face_size=args.face_size, max_hole_ratio=args.max_hole_ratio,
                           keep_intermediate=args.keep_intermediate, depth_format=args.depth_format,
                           depth_hook=args.depth_hook, flip_v=args.flip_v, overwrite=args.overwrite)
        return lambda: asyncio.run(run_pnvi(params))
    if c == "mvp":
        params = MvpInput(manifest=args.manifest, out_dir=args.out_dir, layout=args.layout, fov=args.fov,
                          size=args.size, stride=args.stride, pose_convention=args.pose_convention,
                          images_only=args.images_only, overwrite=args.overwrite)
        return lambda: run_mvp(params)
    if c == "dataset":
        params = DatasetInput(list_path=args.list_path, out_dir=args.out_dir, units=args.units,
                              directions=args.directions, face_size=args.face_size, workers=args.workers,
                              depth_format=args.depth_format, overwrite=args.overwrite)
        return lambda: run_dataset(params)
    if c == "pipeline":
        overrides = {
            "out_dir": args.out_dir, "backend": args.backend, "step": args.step, "strategy": args.strategy,
            "max_hole_ratio": args.max_hole_ratio, "keep_intermediate": args.keep_intermediate,
            "overwrite": args.overwrite,
        }
        params = PipelineInput(config=args.config, overrides=overrides, dry_run=args.dry_run)
        return lambda: asyncio.run(run_pipeline(params))
    raise ValueError(f"unknown command '{c}'")


def _print_report(command: str, report: Dict[str, Any], as_json: bool) -> None:
    fmt = ResponseFormat.JSON if as_json else ResponseFormat.MARKDOWN
    if not as_json and command == "stats" and "table" in report:
        print(report["table"])
    elif not as_json and command == "stats":
        print(f"Hole ratio: {report['hole_percent']}%")
    elif not as_json and report.get("dry_run"):
        print(ResponseFormatter.format_plan(report["branches"]))
    else:
        print(ResponseFormatter.render(command, report, fmt))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        instances.settings = load_settings(threads=args.threads, quiet=args.quiet)
        if args.backend_timeout_sec is not None:
            instances.settings.backend_timeout_sec = args.backend_timeout_sec
        if args.command == "serve":
            from .server import run_stdio
            asyncio.run(run_stdio())
            return EXIT_OK
        report = _build(args)()
    except Exception as e:
        print(handle_error(e), file=sys.stderr, flush=True)
        return exit_code_for(e)

    _print_report(args.command, report, args.json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
