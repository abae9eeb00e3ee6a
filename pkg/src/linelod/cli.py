"""Command-line front end: preprocess, render, bench, serve.

Machine-readable JSON goes to stdout; human-oriented diagnostics go to
stderr.  Exit code 2 signals bad invocations (missing files, malformed
flags), 1 signals processing failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import List, Optional

from .artifact import (
    ArtifactError,
    ingest_geojson,
    read_artifact,
    stats_report,
    write_artifact,
)
from .geometry import CameraPose, GeometryError
from .pipeline import IndexConfig, preprocess_scene
from .raster.core import (
    BENCH_MODES,
    FrameSpec,
    get_kernel,
    heatmap_image,
    render_frame,
    save_png,
    write_counts_csv,
    write_pgm,
)
from .styles import parse_style_config
from .visibility import Lens


def _parse_size(text: str):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")


def _parse_camera(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) not in (3, 5):
        raise argparse.ArgumentTypeError("expected x,y,h or x,y,h,yaw,pitch")
    return parts


def _parse_lens(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected cx,cy,r,factor")
    return parts


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linelod")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="ingest GeoJSON and write an artifact")
    p.add_argument("input", help="GeoJSON file with LineString features")
    p.add_argument("output", help="artifact file to write")
    p.add_argument("--styles", help="style config JSON file")
    p.add_argument("--grid", type=_parse_size, help="grid dimensions WxH")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--leaf-capacity", type=int, default=16)
    p.add_argument("--target-per-cell", type=int, default=2000)

    r = sub.add_parser("render", help="render one frame from an artifact")
    r.add_argument("artifact")
    r.add_argument("--camera", type=_parse_camera, required=True, help="x,y,h[,yaw,pitch]")
    r.add_argument("--fov", type=float, default=60.0, help="vertical field of view, degrees")
    r.add_argument("--size", type=_parse_size, default=(800, 600), help="WxH pixels")
    r.add_argument("--tolerance", type=float, default=1.0, help="threshold in pixels")
    r.add_argument("--mode", choices=("color", "heatmap"), default="color")
    r.add_argument("--bench-mode", choices=sorted(BENCH_MODES), default="AVS")
    r.add_argument("--lens", type=_parse_lens, help="cx,cy,r,factor")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--kernel", choices=("auto", "python", "compiled"), default="auto")
    r.add_argument("-o", "--output", required=True, help="output PNG path")

    b = sub.add_parser("bench", help="time the four render modes")
    b.add_argument("artifact")
    b.add_argument("--cameras", required=True, help="JSON file: list of camera objects")
    b.add_argument("--reps", type=int, default=1)
    b.add_argument("--size", type=_parse_size, default=(256, 256))
    b.add_argument("--tolerance", type=float, default=1.0)
    b.add_argument("--modes", default="AVD,AVS,ANVS,ONVS")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--kernel", choices=("auto", "python", "compiled"), default="auto")

    s = sub.add_parser("serve", help="start the HTTP query/render service")
    s.add_argument("artifact")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8040)

    return ap


def _fail(message: str, code: int = 2) -> int:
    print(message, file=sys.stderr)
    return code


def cmd_preprocess(args) -> int:
    if not os.path.exists(args.input):
        return _fail(f"input file not found: {args.input}")
    style_cfg = None
    if args.styles:
        if not os.path.exists(args.styles):
            return _fail(f"style config not found: {args.styles}")
        with open(args.styles) as fh:
            style_cfg = json.load(fh)
    try:
        ingest = ingest_geojson(args.input)
        for w in ingest.warnings:
            print(w, file=sys.stderr)
        line_types = None
        if style_cfg:
            line_types, _ = parse_style_config(style_cfg)
        gw, gh = args.grid or (0, 0)
        cfg = IndexConfig(
            grid_w=gw,
            grid_h=gh,
            max_depth=args.max_depth,
            leaf_capacity=args.leaf_capacity,
            target_segments_per_cell=args.target_per_cell,
        )
        result = preprocess_scene(
            ingest.polylines,
            line_types=line_types or None,
            index_config=cfg,
            style_config=style_cfg,
        )
        blob = write_artifact(result.dataset, args.output)
    except (ArtifactError, GeometryError, ValueError) as exc:
        return _fail(f"preprocess failed: {exc}", 1)
    report = stats_report(result.dataset, result.report)
    report["artifact_bytes"] = len(blob)
    report["warnings"] = len(ingest.warnings)
    json.dump(report, sys.stdout, indent=2)
    print()
    return 0


def _camera_from_args(args, width: int, height: int) -> CameraPose:
    cam = list(args.camera)
    yaw = cam[3] if len(cam) == 5 else 0.0
    pitch = cam[4] if len(cam) == 5 else math.pi / 2
    return CameraPose(
        x=cam[0],
        y=cam[1],
        height=cam[2],
        yaw=yaw,
        pitch=pitch,
        fov_y=math.radians(args.fov),
        viewport_w=width,
        viewport_h=height,
    )


def cmd_render(args) -> int:
    if not os.path.exists(args.artifact):
        return _fail(f"artifact not found: {args.artifact}")
    t0 = time.perf_counter()
    try:
        dataset = read_artifact(args.artifact)
    except ArtifactError as exc:
        return _fail(f"cannot load artifact: {exc}", 1)
    width, height = args.size
    try:
        camera = _camera_from_args(args, width, height)
        lens = Lens(*args.lens) if args.lens else None
        frame = FrameSpec(
            camera=camera,
            width=width,
            height=height,
            tolerance_px=args.tolerance,
            lens=lens,
            mode=args.mode,
            flags=BENCH_MODES[args.bench_mode],
        )
    except (GeometryError, ValueError) as exc:
        return _fail(f"bad frame parameters: {exc}")
    t1 = time.perf_counter()
    out = render_frame(frame, dataset, workers=args.workers, kernel=args.kernel)
    t2 = time.perf_counter()
    if args.mode == "heatmap":
        save_png(args.output, heatmap_image(out.counts))
        base, _ = os.path.splitext(args.output)
        write_pgm(base + ".pgm", out.counts)
        write_counts_csv(base + ".csv", out.counts)
    else:
        save_png(args.output, out.rgba)
    t3 = time.perf_counter()
    _, kernel_name = get_kernel(args.kernel)
    json.dump(
        {
            "output": args.output,
            "mode": args.mode,
            "benchMode": args.bench_mode,
            "kernel": kernel_name,
            "distanceTests": int(out.counts.sum()),
            "timings": {
                # descent and shading are interleaved per pixel in the
                # deferred pass, so they are reported as one number
                "loadMs": (t1 - t0) * 1e3,
                "descentShadeMs": (t2 - t1) * 1e3,
                "writeMs": (t3 - t2) * 1e3,
                "totalMs": (t3 - t0) * 1e3,
            },
        },
        sys.stdout,
        indent=2,
    )
    print()
    return 0


def cmd_bench(args) -> int:
    from .bench import format_table, run_bench

    if not os.path.exists(args.artifact):
        return _fail(f"artifact not found: {args.artifact}")
    if not os.path.exists(args.cameras):
        return _fail(f"camera list not found: {args.cameras}")
    try:
        dataset = read_artifact(args.artifact)
        with open(args.cameras) as fh:
            cam_specs = json.load(fh)
        cameras = [
            CameraPose(
                x=c["x"],
                y=c["y"],
                height=c["height"],
                yaw=c.get("yaw", 0.0),
                pitch=c.get("pitch", math.pi / 2),
                fov_y=c.get("fovY", math.pi / 3),
            )
            for c in cam_specs
        ]
        width, height = args.size
        report = run_bench(
            dataset,
            cameras,
            width=width,
            height=height,
            tolerance_px=args.tolerance,
            repetitions=args.reps,
            modes=[m.strip() for m in args.modes.split(",") if m.strip()],
            workers=args.workers,
            kernel=args.kernel,
        )
    except (ArtifactError, GeometryError, KeyError, ValueError, json.JSONDecodeError) as exc:
        return _fail(f"bench failed: {exc}", 1)
    print(format_table(report), file=sys.stderr)
    json.dump(report, sys.stdout, indent=2)
    print()
    return 0


def cmd_serve(args) -> int:
    if not os.path.exists(args.artifact):
        return _fail(f"artifact not found: {args.artifact}")
    try:
        dataset = read_artifact(args.artifact)
    except ArtifactError as exc:
        return _fail(f"cannot load artifact: {exc}", 1)
    from .service import create_app

    import uvicorn

    uvicorn.run(create_app(dataset), host=args.host, port=args.port)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "preprocess": cmd_preprocess,
        "render": cmd_render,
        "bench": cmd_bench,
        "serve": cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
