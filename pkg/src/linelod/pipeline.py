"""Preprocessing pipeline: polylines in, runtime dataset out.

Chains tree construction, saturation, segment extraction, dependee
analysis and (optionally) spatial index construction into a Dataset.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .blg import RefinementTree, build_tree, saturate_tree
from .data import Dataset, Polyline, SegmentArrays
from .deps import analyze_scene
from .geometry import LineType, SourcePolyline
from .segments import extract_all_segments, original_segments, segment_count


@dataclass
class IndexConfig:
    grid_w: int = 0  # 0 = choose from segment count
    grid_h: int = 0
    max_depth: int = 8
    leaf_capacity: int = 16
    target_segments_per_cell: int = 2000


@dataclass
class PreprocessResult:
    dataset: Dataset
    trees: List[RefinementTree]
    report: dict


def default_line_types(ids) -> Dict[int, LineType]:
    return {i: LineType(id=i, priority=i, base_width=10.0, style_profile_id=i % 9) for i in ids}


def preprocess_scene(
    polylines: Sequence[SourcePolyline],
    line_types: Optional[Dict[int, LineType]] = None,
    index_config: Optional[IndexConfig] = None,
    build_indexes: bool = True,
    style_config: Optional[dict] = None,
    dependee_analysis: bool = True,
) -> PreprocessResult:
    trees: List[RefinementTree] = []
    offset = 0
    pls: List[Polyline] = []
    for i, line in enumerate(polylines):
        trees.append(saturate_tree(build_tree(line, polyline_id=i, id_offset=offset)))
        pls.append(Polyline(start=offset, count=len(line.points), line_type=line.line_type))
        offset += len(line.points)

    ap_segs: List = []
    orig_segs: List = []
    for tree in trees:
        ap_segs.extend(extract_all_segments(tree))
        orig_segs.extend(original_segments(tree))

    dep = analyze_scene(trees, dependee_analysis=dependee_analysis)
    if line_types is None:
        line_types = default_line_types(sorted({pl.line_type for pl in pls} | {0}))

    dataset = Dataset(
        points=dep.positions,
        eval_pos=dep.eval_positions,
        e_star=dep.e_star,
        d_star=dep.d_star,
        polylines=pls,
        segments=SegmentArrays.from_segments(ap_segs),
        orig_segments=SegmentArrays.from_segments(orig_segs),
        line_types=line_types,
        proxies=dep.proxies,
        style_config=style_config,
    )

    n_points = offset
    n_orig = len(orig_segs)
    n_lines = len(pls)
    report = {
        "polylines": n_lines,
        "points": n_points,
        "segs": n_orig,
        "ap_segs": len(ap_segs),
        "ap_segs_identity": 2 * n_orig - n_lines if n_lines else 0,
        "proxies": len(dep.proxies),
        "dependee_points": len(dep.dependees),
    }
    assert report["ap_segs"] == sum(segment_count(pl.count) for pl in pls)

    if build_indexes:
        from .sindex import build_standard_indexes

        build_standard_indexes(dataset, index_config or IndexConfig())
        for name, idx in dataset.indexes.items():
            report[f"qt_segs_{name}"] = idx.registration_count()
    return PreprocessResult(dataset=dataset, trees=trees, report=report)
