#!/usr/bin/env python3
"""Compare the compiled shading kernel against the pure-Python fallback.

Builds a synthetic street-like scene, renders a set of frames with each
kernel, verifies that the outputs are bitwise identical, and prints a
timing table.  Run from the repository root:

    python3 benchmarks/kernel_compare.py [--size 256x256] [--frames 6] [--reps 3]
"""
from __future__ import annotations

import argparse
import math
import random
import statistics
import sys
import time

import numpy as np

from linelod.geometry import CameraPose, SourcePolyline
from linelod.pipeline import preprocess_scene
from linelod.raster.core import FrameSpec, get_kernel, render_frame
from linelod.styles import default_style_config

NADIR = math.pi / 2


def build_scene(n_lines: int = 40, seed: int = 3):
    rng = random.Random(seed)
    lines = []
    for _ in range(n_lines):
        x, y = rng.uniform(-300, 300), rng.uniform(-300, 300)
        pts = [(x, y)]
        heading = rng.uniform(0, 2 * math.pi)
        for _ in range(rng.randint(4, 14)):
            heading += rng.uniform(-0.7, 0.7)
            step = rng.uniform(5, 30)
            x += step * math.cos(heading)
            y += step * math.sin(heading)
            pts.append((x, y))
        lines.append(SourcePolyline(points=tuple(pts), line_type=rng.randint(0, 2)))
    return preprocess_scene(lines, style_config=default_style_config())


def frames(width: int, height: int, n: int):
    rng = random.Random(10)
    out = []
    for i in range(n):
        cam = CameraPose(
            x=rng.uniform(-150, 150),
            y=rng.uniform(-150, 150),
            height=rng.uniform(40, 500),
            yaw=rng.uniform(0, 2 * math.pi),
            pitch=rng.uniform(0.6, NADIR),
        )
        out.append(FrameSpec(camera=cam, width=width, height=height, tolerance_px=1.0))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", default="256x256")
    ap.add_argument("--frames", type=int, default=6)
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args(argv)
    width, height = (int(v) for v in args.size.lower().split("x"))

    _, name = get_kernel("auto")
    if name != "compiled":
        print("compiled kernel unavailable; nothing to compare", file=sys.stderr)
        return 1

    prep = build_scene()
    specs = frames(width, height, args.frames)

    timings = {}
    outputs = {}
    for kernel in ("compiled", "python"):
        per_frame = []
        results = []
        for spec in specs:
            best = math.inf
            for _ in range(args.reps):
                t0 = time.perf_counter()
                out = render_frame(spec, prep.dataset, kernel=kernel)
                best = min(best, time.perf_counter() - t0)
            per_frame.append(best * 1e3)
            results.append(out)
        timings[kernel] = per_frame
        outputs[kernel] = results

    for a, b in zip(outputs["compiled"], outputs["python"]):
        assert np.array_equal(a.rgba, b.rgba), "kernel outputs differ"
        assert np.array_equal(a.counts, b.counts), "kernel test counts differ"

    print(f"scene: {len(prep.dataset.segments)} segments, "
          f"{args.frames} frames at {width}x{height}, best of {args.reps} reps")
    print(f"{'frame':>5} {'compiled ms':>12} {'python ms':>12} {'speedup':>8}")
    for i, (c, p) in enumerate(zip(timings["compiled"], timings["python"])):
        print(f"{i:>5} {c:>12.2f} {p:>12.2f} {p / c:>7.1f}x")
    cm = statistics.fmean(timings["compiled"])
    pm = statistics.fmean(timings["python"])
    print(f"{'mean':>5} {cm:>12.2f} {pm:>12.2f} {pm / cm:>7.1f}x")
    print("outputs bitwise identical across kernels")
    return 0


if __name__ == "__main__":
    sys.exit(main())
