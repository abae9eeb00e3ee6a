"""Frame benchmark harness: times the four render modes over camera sets.

Distance-test totals come from the renderer's per-pixel count matrix, so
they are exact and machine-checkable; wall-clock numbers are reported as
mean/stddev over repetitions.
"""
from __future__ import annotations

import statistics
import time
from typing import Dict, List, Optional, Sequence

from .data import Dataset
from .geometry import CameraPose
from .raster.core import BENCH_MODES, FrameSpec, render_frame

BENCH_SCHEMA_VERSION = 1


def run_bench(
    dataset: Dataset,
    cameras: Sequence[CameraPose],
    width: int = 256,
    height: int = 256,
    tolerance_px: float = 1.0,
    repetitions: int = 1,
    modes: Optional[Sequence[str]] = None,
    workers: int = 1,
    kernel: str = "auto",
) -> dict:
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    modes = list(modes or BENCH_MODES)
    unknown = [m for m in modes if m not in BENCH_MODES]
    if unknown:
        raise ValueError(f"unknown bench modes: {unknown}")

    results: Dict[str, dict] = {}
    for mode in modes:
        flags = BENCH_MODES[mode]
        times_ms: List[float] = []
        tests_per_frame: List[int] = []
        for rep in range(repetitions):
            for cam in cameras:
                frame = FrameSpec(
                    camera=cam,
                    width=width,
                    height=height,
                    tolerance_px=tolerance_px,
                    flags=flags,
                )
                t0 = time.perf_counter()
                out = render_frame(frame, dataset, workers=workers, kernel=kernel)
                times_ms.append((time.perf_counter() - t0) * 1e3)
                if rep == 0:
                    tests_per_frame.append(int(out.counts.sum()))
        results[mode] = {
            "frames": len(cameras),
            "repetitions": repetitions,
            "ms_mean": statistics.fmean(times_ms) if times_ms else 0.0,
            "ms_stddev": statistics.pstdev(times_ms) if len(times_ms) > 1 else 0.0,
            "tests_per_frame": tests_per_frame,
            "tests_total": sum(tests_per_frame),
        }
    return {
        "schema": BENCH_SCHEMA_VERSION,
        "width": width,
        "height": height,
        "tolerance_px": tolerance_px,
        "modes": results,
    }


def format_table(report: dict) -> str:
    """Human-readable view of a bench report."""
    rows = [f"{'mode':<6} {'frames':>6} {'ms mean':>10} {'ms sd':>8} {'dist tests':>12}"]
    for mode, r in report["modes"].items():
        rows.append(
            f"{mode:<6} {r['frames']:>6} {r['ms_mean']:>10.2f} "
            f"{r['ms_stddev']:>8.2f} {r['tests_total']:>12}"
        )
    return "\n".join(rows)
