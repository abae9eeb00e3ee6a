"""Shared domain types and elementary planar geometry.

All coordinates are planar, pre-projected world units (meters) in double
precision.  Everything here is a pure function over immutable inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

Point = Tuple[float, float]


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SourcePolyline:
    """An ordered run of at least two distinct world points plus a line type id."""

    points: Tuple[Point, ...]
    line_type: int = 0

    def __post_init__(self):
        if len(self.points) < 2:
            raise GeometryError("polyline needs at least 2 points")
        for x, y in self.points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise GeometryError("non-finite coordinate in polyline")
        for (ax, ay), (bx, by) in zip(self.points, self.points[1:]):
            if ax == bx and ay == by:
                raise GeometryError("consecutive duplicate points in polyline")
        if self.line_type < 0:
            raise GeometryError("line type must be non-negative")


@dataclass(frozen=True)
class CameraPose:
    """Perspective camera above the ground plane z = 0.

    ``yaw`` rotates about +z (0 faces +x), ``pitch`` > 0 tilts the view
    downward (pi/2 is nadir).  ``height`` must be positive for the ground
    plane to be renderable.
    """

    x: float
    y: float
    height: float
    yaw: float = 0.0
    pitch: float = math.pi / 2
    fov_y: float = math.pi / 3
    viewport_w: int = 800
    viewport_h: int = 600

    def __post_init__(self):
        if self.height <= 0:
            raise GeometryError("camera height must be > 0")
        if not 0.0 < self.fov_y < math.pi:
            raise GeometryError("fov_y must lie in (0, pi)")


@dataclass(frozen=True)
class LineType:
    """Rendering attributes of one line category."""

    id: int
    priority: int = 0
    base_width: float = 10.0
    style_profile_id: int = 0
    m_near: float = 1.0
    m_far: float = 1.0
    d_near: float = 0.0
    d_far: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.base_width <= 0:
            raise GeometryError("base_width must be > 0")
        if self.m_near <= 0 or self.m_far <= 0:
            raise GeometryError("thickness multipliers must be > 0")

    @property
    def max_multiplier(self) -> float:
        return max(self.m_near, self.m_far)


def distance_point_to_segment(p: Point, a: Point, b: Point) -> float:
    """Euclidean distance from p to the closed segment [a, b].

    A degenerate segment (a == b) collapses to the distance to that point.
    """
    px, py = p
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    len_sq = dx * dx + dy * dy
    if len_sq == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / len_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def distance_point_to_line(p: Point, a: Point, b: Point) -> float:
    """Perpendicular distance from p to the infinite line through a and b."""
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    length = math.hypot(dx, dy)
    if length == 0.0:
        raise GeometryError("degenerate baseline: a == b")
    return abs(dx * (p[1] - ay) - dy * (p[0] - ax)) / length


def point_in_triangle(q: Point, t1: Point, t2: Point, t3: Point) -> bool:
    """True iff q lies inside or on the boundary of triangle (t1, t2, t3).

    A collinear (zero-area) triangle contains exactly the points on its
    spanning segment.  Boundary inclusion is deliberate: containment is used
    as a conservative witness test and must never miss a touching point.
    """
    qx, qy = q

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(t1, t2, q)
    d2 = cross(t2, t3, q)
    d3 = cross(t3, t1, q)
    area2 = cross(t1, t2, t3)
    if area2 == 0.0:
        # Degenerate: q must sit on the longest spanning segment.
        pairs = [(t1, t2), (t2, t3), (t1, t3)]
        a, b = max(pairs, key=lambda ab: (ab[0][0] - ab[1][0]) ** 2 + (ab[0][1] - ab[1][1]) ** 2)
        return distance_point_to_segment(q, a, b) == 0.0
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


def eye_distance(camera: CameraPose, p: Point) -> float:
    """3D distance from the camera eye to the ground point (p.x, p.y, 0)."""
    return math.sqrt((p[0] - camera.x) ** 2 + (p[1] - camera.y) ** 2 + camera.height**2)


def eye_distance_xyz(eye_x: float, eye_y: float, eye_z: float, p: Point) -> float:
    return math.sqrt((p[0] - eye_x) ** 2 + (p[1] - eye_y) ** 2 + eye_z * eye_z)
