"""Exhaustive attributed line-segment extraction from refinement trees.

Every segment that can appear at any refinement state of a polyline is
emitted exactly once, tagged with the refinement point that creates it (its
generator) and the point whose inclusion subdivides it (its splitter).  A
segment's visibility then reduces to two independent point tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

from .blg import RefinementNode, RefinementTree


@dataclass(frozen=True)
class AttributedSegment:
    a: int  # global point id, precedes b in polyline order
    b: int
    generator: Optional[int]  # None only for the initial begin-end segment
    splitter: Optional[int]
    line_type: int = 0


def extract_all_segments(tree: RefinementTree) -> List[AttributedSegment]:
    """Enumerate the full segment set of one polyline.

    Inserting a refinement point g into its baseline (l, r) creates the two
    segments (l, g) and (g, r); together with the initial begin-end segment
    this yields every drawable configuration.  The splitter of (l, g) is g's
    left child (the next point to appear between l and g), symmetrically the
    right child for (g, r).
    """
    lt = tree.line_type
    root_id = tree.root.point_id if tree.root else None
    out = [AttributedSegment(tree.p_begin, tree.p_end, None, root_id, lt)]

    def visit(node: Optional[RefinementNode]):
        if node is None:
            return
        g = node.point_id
        left_split = node.left.point_id if node.left else None
        right_split = node.right.point_id if node.right else None
        out.append(AttributedSegment(node.baseline_left, g, g, left_split, lt))
        out.append(AttributedSegment(g, node.baseline_right, g, right_split, lt))
        visit(node.left)
        visit(node.right)

    visit(tree.root)
    return out


def segment_count(k: int) -> int:
    """Exact cardinality of the all-possible-segments set for a k-point line."""
    if k < 2:
        raise ValueError("a polyline needs at least 2 points")
    return 2 * k - 3


def original_segments(tree: RefinementTree) -> List[AttributedSegment]:
    """The k-1 finest segments of the source polyline, untagged."""
    return [
        AttributedSegment(i, i + 1, None, None, tree.line_type)
        for i in range(tree.p_begin, tree.p_end)
    ]


def is_visible_basic(seg: AttributedSegment, include: Callable[[int], bool]) -> bool:
    """Segment visibility for an ancestor-monotone point-inclusion predicate."""
    if seg.generator is not None and not include(seg.generator):
        return False
    if seg.splitter is not None and include(seg.splitter):
        return False
    return True
