"""Runtime point-inclusion and segment-visibility evaluation.

The per-point test compares the pre-evaluated error e* against the
view-dependent threshold epsilon(d - d*), optionally modulated by a
circular lens.  Segment visibility is the generator/splitter pair test
over those point decisions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .data import NO_POINT, Dataset, Polyline
from .geometry import CameraPose


@dataclass(frozen=True)
class ThresholdPolicy:
    """Maps camera distance to permissible world-space error.

    ``scale`` is the world size of one pixel at unit distance,
    2 tan(fovY / 2) / viewportH.
    """

    tolerance_px: float
    scale: float

    @classmethod
    def for_camera(cls, camera: CameraPose, tolerance_px: float) -> "ThresholdPolicy":
        if tolerance_px < 0:
            raise ValueError("tolerance must be >= 0")
        return cls(tolerance_px, 2.0 * math.tan(camera.fov_y / 2.0) / camera.viewport_h)

    def epsilon(self, d: float) -> float:
        if d <= 0.0:
            return 0.0
        return self.tolerance_px * d * self.scale


@dataclass(frozen=True)
class Lens:
    """Circular region scaling the local threshold: factor < 1 refines."""

    cx: float
    cy: float
    radius: float
    factor: float

    def __post_init__(self):
        if self.radius <= 0 or self.factor <= 0:
            raise ValueError("lens radius and factor must be > 0")


def effective_lens_factor(lens: Optional[Lens], px: float, py: float, d_star: float) -> float:
    """Conservative lens factor at a point's evaluation position.

    A refine lens reaches d* beyond its rim (any governed geometry may lie
    that far away), a simplify lens is shrunk by d* for the same reason;
    this keeps point inclusion ancestor-monotone.
    """
    if lens is None or lens.factor == 1.0:
        return 1.0
    dist = math.hypot(px - lens.cx, py - lens.cy)
    if lens.factor < 1.0:
        return lens.factor if dist <= lens.radius + d_star else 1.0
    return lens.factor if dist <= lens.radius - d_star else 1.0


def point_included(
    dataset: Dataset,
    pid: int,
    camera: CameraPose,
    policy: ThresholdPolicy,
    lens: Optional[Lens] = None,
) -> bool:
    if pid < 0 or pid >= len(dataset.points):
        raise IndexError(f"unknown point id {pid}")
    ex, ey = dataset.eval_pos[pid]
    d = math.sqrt((ex - camera.x) ** 2 + (ey - camera.y) ** 2 + camera.height**2)
    factor = effective_lens_factor(lens, ex, ey, dataset.d_star[pid])
    return dataset.e_star[pid] > factor * policy.epsilon(d - dataset.d_star[pid])


def segment_visible(
    dataset: Dataset,
    seg_index: int,
    camera: CameraPose,
    policy: ThresholdPolicy,
    lens: Optional[Lens] = None,
    segments=None,
) -> bool:
    segs = dataset.segments if segments is None else segments
    gen = segs.generator[seg_index]
    if gen != NO_POINT and not point_included(dataset, int(gen), camera, policy, lens):
        return False
    spl = segs.splitter[seg_index]
    if spl != NO_POINT and point_included(dataset, int(spl), camera, policy, lens):
        return False
    return True


def simplify_polyline(
    dataset: Dataset,
    polyline: Polyline,
    camera: CameraPose,
    policy: ThresholdPolicy,
    lens: Optional[Lens] = None,
) -> List[int]:
    """Chain of included point ids, begin and end always present."""
    chain = [polyline.start]
    for pid in range(polyline.start + 1, polyline.end):
        if point_included(dataset, pid, camera, policy, lens):
            chain.append(pid)
    chain.append(polyline.end)
    return chain


def simplify_scene(
    dataset: Dataset,
    camera: CameraPose,
    policy: ThresholdPolicy,
    lens: Optional[Lens] = None,
    clip_rect: Optional[Tuple[float, float, float, float]] = None,
) -> List[Tuple[Polyline, List[int]]]:
    """Per-polyline included chains, restricted to lines touching clip_rect."""
    out = []
    for pl in dataset.polylines:
        if clip_rect is not None:
            pts = dataset.points[pl.start : pl.start + pl.count]
            x0, y0, x1, y1 = clip_rect
            if (
                pts[:, 0].max() < x0
                or pts[:, 0].min() > x1
                or pts[:, 1].max() < y0
                or pts[:, 1].min() > y1
            ):
                continue
        out.append((pl, simplify_polyline(dataset, pl, camera, policy, lens)))
    return out
