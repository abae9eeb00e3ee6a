"""Two-level spatial search: a coarse uniform grid holding one quadtree per
cell, registering each segment (expanded by its largest possible rendered
half-width) at the deepest node that fully contains its expanded bounding
box.  A point query walks one root-to-leaf path per cell and is guaranteed
to encounter every segment whose expanded extent covers the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .data import Dataset, SegmentArrays
from .geometry import LineType


def max_half_width(line_type: LineType, dynamic: bool) -> float:
    """Largest half-width a segment of this type can render at."""
    if dynamic:
        return line_type.base_width / 2.0 * line_type.max_multiplier
    return line_type.base_width / 2.0


class _BuildNode:
    __slots__ = ("children", "segs")

    def __init__(self):
        self.children: List[Optional["_BuildNode"]] = [None, None, None, None]
        self.segs: List[int] = []


@dataclass
class SegmentIndex:
    bbox: Tuple[float, float, float, float]
    grid_w: int
    grid_h: int
    max_depth: int
    leaf_capacity: int
    # flattened quadtrees, nodes in preorder across all cells
    cell_root: np.ndarray  # (grid_h * grid_w,) int64, -1 = empty cell
    children: np.ndarray  # (M, 4) int64, -1 = absent
    node_seg_off: np.ndarray  # (M,) int64 into seg_refs
    node_seg_cnt: np.ndarray  # (M,) int32
    seg_refs: np.ndarray  # (R,) int32

    @property
    def cell_size(self) -> Tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x1 - x0) / self.grid_w, (y1 - y0) / self.grid_h)

    def registration_count(self) -> int:
        return int(len(self.seg_refs))

    def descend(self, qx: float, qy: float) -> Iterator[int]:
        """Yield segment ids along the root-to-leaf path containing (qx, qy)."""
        x0, y0, x1, y1 = self.bbox
        if not (x0 <= qx <= x1 and y0 <= qy <= y1):
            return
        cw, ch = self.cell_size
        cx = min(int((qx - x0) / cw), self.grid_w - 1)
        cy = min(int((qy - y0) / ch), self.grid_h - 1)
        node = int(self.cell_root[cy * self.grid_w + cx])
        rx0 = x0 + cx * cw
        ry0 = y0 + cy * ch
        rx1 = rx0 + cw
        ry1 = ry0 + ch
        while node >= 0:
            off = int(self.node_seg_off[node])
            for i in range(int(self.node_seg_cnt[node])):
                yield int(self.seg_refs[off + i])
            mx = (rx0 + rx1) / 2.0
            my = (ry0 + ry1) / 2.0
            ix = 1 if qx >= mx else 0
            iy = 1 if qy >= my else 0
            node = int(self.children[node, iy * 2 + ix])
            if ix:
                rx0 = mx
            else:
                rx1 = mx
            if iy:
                ry0 = my
            else:
                ry1 = my

    def count_stats(self) -> dict:
        counts = self.node_seg_cnt
        hist: Dict[int, int] = {}
        for c in counts.tolist():
            hist[c] = hist.get(c, 0) + 1
        byte_estimate = (
            self.cell_root.nbytes
            + self.children.nbytes
            + self.node_seg_off.nbytes
            + self.node_seg_cnt.nbytes
            + self.seg_refs.nbytes
        )
        return {
            "qt_segs": self.registration_count(),
            "nodes": int(len(counts)),
            "per_node_histogram": hist,
            "bytes": int(byte_estimate),
        }


def choose_grid(n_segments: int, bbox, target_per_cell: int) -> Tuple[int, int]:
    x0, y0, x1, y1 = bbox
    w = max(x1 - x0, 1e-9)
    h = max(y1 - y0, 1e-9)
    cells = max(1, n_segments // max(target_per_cell, 1))
    gw = max(1, int(round(math.sqrt(cells * w / h))))
    gh = max(1, int(round(cells / gw)))
    return gw, gh


def build_index(
    segments: SegmentArrays,
    points: np.ndarray,
    line_types: Dict[int, LineType],
    bbox: Tuple[float, float, float, float],
    grid_w: int = 0,
    grid_h: int = 0,
    max_depth: int = 8,
    leaf_capacity: int = 16,
    target_per_cell: int = 2000,
    dynamic_thickness: bool = False,
) -> SegmentIndex:
    """Deterministic construction; identical inputs give identical arrays."""
    x0, y0, x1, y1 = bbox
    # pad so every point within reach of a rendered line lies inside the grid
    used = set(np.unique(segments.line_type).tolist()) if len(segments) else set()
    pad = max((max_half_width(line_types[t], dynamic_thickness) for t in used), default=0.0)
    x0 -= pad
    y0 -= pad
    x1 += pad
    y1 += pad
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    bbox = (x0, y0, x1, y1)
    if grid_w <= 0 or grid_h <= 0:
        grid_w, grid_h = choose_grid(len(segments), bbox, target_per_cell)
    cw = (x1 - x0) / grid_w
    ch = (y1 - y0) / grid_h

    roots: Dict[int, _BuildNode] = {}

    def insert(cell_idx: int, rect, seg_bbox, seg_id: int):
        node = roots.get(cell_idx)
        if node is None:
            node = roots[cell_idx] = _BuildNode()
        rx0, ry0, rx1, ry1 = rect
        bx0, by0, bx1, by1 = seg_bbox
        depth = 0
        while depth < max_depth:
            mx = (rx0 + rx1) / 2.0
            my = (ry0 + ry1) / 2.0
            if bx1 < mx:
                ix = 0
            elif bx0 > mx:
                ix = 1
            else:
                break
            if by1 < my:
                iy = 0
            elif by0 > my:
                iy = 1
            else:
                break
            child_i = iy * 2 + ix
            child = node.children[child_i]
            if child is None:
                child = node.children[child_i] = _BuildNode()
            node = child
            if ix:
                rx0 = mx
            else:
                rx1 = mx
            if iy:
                ry0 = my
            else:
                ry1 = my
            depth += 1
        node.segs.append(seg_id)

    n = len(segments)
    for sid in range(n):
        pa = points[segments.a[sid]]
        pb = points[segments.b[sid]]
        lt = line_types[int(segments.line_type[sid])]
        r = max_half_width(lt, dynamic_thickness)
        bx0 = min(pa[0], pb[0]) - r
        by0 = min(pa[1], pb[1]) - r
        bx1 = max(pa[0], pb[0]) + r
        by1 = max(pa[1], pb[1]) + r
        c0x = max(int((bx0 - x0) / cw), 0)
        c1x = min(int((bx1 - x0) / cw), grid_w - 1)
        c0y = max(int((by0 - y0) / ch), 0)
        c1y = min(int((by1 - y0) / ch), grid_h - 1)
        if c1x < 0 or c0x > grid_w - 1 or c1y < 0 or c0y > grid_h - 1:
            continue
        for cy in range(c0y, c1y + 1):
            for cx in range(c0x, c1x + 1):
                rect = (x0 + cx * cw, y0 + cy * ch, x0 + (cx + 1) * cw, y0 + (cy + 1) * ch)
                insert(cy * grid_w + cx, rect, (bx0, by0, bx1, by1), sid)

    # flatten in cell order, nodes in preorder
    cell_root = np.full(grid_w * grid_h, -1, dtype=np.int64)
    children_rows: List[List[int]] = []
    offs: List[int] = []
    cnts: List[int] = []
    refs: List[int] = []

    def flatten(node: _BuildNode) -> int:
        idx = len(children_rows)
        children_rows.append([-1, -1, -1, -1])
        offs.append(len(refs))
        cnts.append(len(node.segs))
        refs.extend(node.segs)
        for ci, child in enumerate(node.children):
            if child is not None:
                children_rows[idx][ci] = flatten(child)
        return idx

    for cell_idx in sorted(roots):
        cell_root[cell_idx] = flatten(roots[cell_idx])

    return SegmentIndex(
        bbox=bbox,
        grid_w=grid_w,
        grid_h=grid_h,
        max_depth=max_depth,
        leaf_capacity=leaf_capacity,
        cell_root=cell_root,
        children=np.array(children_rows, dtype=np.int64).reshape(-1, 4),
        node_seg_off=np.array(offs, dtype=np.int64),
        node_seg_cnt=np.array(cnts, dtype=np.int32),
        seg_refs=np.array(refs, dtype=np.int32),
    )


def build_standard_indexes(dataset: Dataset, cfg) -> None:
    """Attach the three index variants used by the render/bench modes."""
    common = dict(
        points=dataset.points,
        line_types=dataset.line_types,
        bbox=dataset.bbox,
        grid_w=cfg.grid_w,
        grid_h=cfg.grid_h,
        max_depth=cfg.max_depth,
        leaf_capacity=cfg.leaf_capacity,
        target_per_cell=cfg.target_segments_per_cell,
    )
    dataset.indexes["ap_static"] = build_index(dataset.segments, dynamic_thickness=False, **common)
    dataset.indexes["ap_dynamic"] = build_index(dataset.segments, dynamic_thickness=True, **common)
    dataset.indexes["orig_static"] = build_index(
        dataset.orig_segments, dynamic_thickness=False, **common
    )
