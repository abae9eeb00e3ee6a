"""In-memory runtime dataset shared by the visibility engine and rasterizer.

Everything is stored as flat numpy arrays so the same buffers can be
serialized, handed to the compiled shading kernel, or queried from Python.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .deps import ProxyPoint
from .geometry import LineType

NO_POINT = -1  # sentinel for "no generator" / "no splitter"


@dataclass
class SegmentArrays:
    """Column layout of attributed segments; -1 marks an absent reference."""

    a: np.ndarray  # int32
    b: np.ndarray
    generator: np.ndarray
    splitter: np.ndarray
    line_type: np.ndarray

    def __len__(self):
        return len(self.a)

    @classmethod
    def from_segments(cls, segs) -> "SegmentArrays":
        n = len(segs)
        a = np.empty(n, np.int32)
        b = np.empty(n, np.int32)
        gen = np.empty(n, np.int32)
        spl = np.empty(n, np.int32)
        lt = np.empty(n, np.int32)
        for i, s in enumerate(segs):
            a[i] = s.a
            b[i] = s.b
            gen[i] = NO_POINT if s.generator is None else s.generator
            spl[i] = NO_POINT if s.splitter is None else s.splitter
            lt[i] = s.line_type
        return cls(a, b, gen, spl, lt)


@dataclass
class Polyline:
    start: int  # global id of first point
    count: int
    line_type: int

    @property
    def end(self) -> int:
        return self.start + self.count - 1


@dataclass
class Dataset:
    points: np.ndarray  # (N, 2) float64 world coordinates (for drawing)
    eval_pos: np.ndarray  # (N, 2) float64 proxy-aware evaluation positions
    e_star: np.ndarray  # (N,) float64
    d_star: np.ndarray  # (N,) float64
    polylines: List[Polyline]
    segments: SegmentArrays  # all-possible segments
    orig_segments: SegmentArrays  # the finest original segments
    line_types: Dict[int, LineType]
    proxies: List[ProxyPoint] = field(default_factory=list)
    style_config: Optional[dict] = None
    indexes: dict = field(default_factory=dict)  # name -> SegmentIndex

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        if len(self.points) == 0:
            return (0.0, 0.0, 0.0, 0.0)
        mn = self.points.min(axis=0)
        mx = self.points.max(axis=0)
        return (float(mn[0]), float(mn[1]), float(mx[0]), float(mx[1]))

    def line_type_of_point(self, pid: int) -> int:
        for pl in self.polylines:
            if pl.start <= pid <= pl.end:
                return pl.line_type
        raise KeyError(pid)
