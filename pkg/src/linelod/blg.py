"""Binary line generalization trees built by recursive Douglas-Peucker splits.

Each interior point of a polyline becomes one tree node carrying its raw
baseline error ``e`` plus the saturated attributes ``e_hat``, ``d_max`` and
``d_max_hat`` that make threshold tests ancestor-monotone at runtime.  The
threshold-stopped traversal here is also the golden oracle the runtime
visibility engine is checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

from .geometry import CameraPose, Point, SourcePolyline, distance_point_to_line, eye_distance


@dataclass
class RefinementNode:
    point_id: int  # global point id
    e: float
    baseline_left: int
    baseline_right: int
    left: Optional["RefinementNode"] = None
    right: Optional["RefinementNode"] = None
    e_hat: float = 0.0
    d_max: float = 0.0
    d_max_hat: float = 0.0


@dataclass
class RefinementTree:
    polyline_id: int
    root: Optional[RefinementNode]
    p_begin: int  # global id of the first point
    p_end: int  # global id of the last point
    points: tuple  # world coordinates of all polyline points, local order
    line_type: int = 0
    saturated: bool = False

    def local(self, point_id: int) -> Point:
        return self.points[point_id - self.p_begin]

    def nodes(self) -> List[RefinementNode]:
        out: List[RefinementNode] = []
        stack = [self.root] if self.root else []
        while stack:
            n = stack.pop()
            out.append(n)
            if n.left:
                stack.append(n.left)
            if n.right:
                stack.append(n.right)
        return out


def build_tree(line: SourcePolyline, polyline_id: int = 0, id_offset: int = 0) -> RefinementTree:
    """Recursive DP construction over the interior points of ``line``.

    The interior point farthest from the current baseline roots its subtree;
    ties pick the lower index so trees are identical across runs.  Collinear
    points get e = 0 but stay in the tree.
    """
    pts = line.points
    k = len(pts)

    def recurse(lo: int, hi: int) -> Optional[RefinementNode]:
        if hi - lo < 2:
            return None
        best_i = -1
        best_e = -1.0
        for i in range(lo + 1, hi):
            e = distance_point_to_line(pts[i], pts[lo], pts[hi])
            if e > best_e:
                best_e = e
                best_i = i
        node = RefinementNode(
            point_id=id_offset + best_i,
            e=best_e,
            baseline_left=id_offset + lo,
            baseline_right=id_offset + hi,
        )
        node.left = recurse(lo, best_i)
        node.right = recurse(best_i, hi)
        return node

    return RefinementTree(
        polyline_id=polyline_id,
        root=recurse(0, k - 1),
        p_begin=id_offset,
        p_end=id_offset + k - 1,
        points=tuple(pts),
        line_type=line.line_type,
    )


def traverse_with_threshold(tree: RefinementTree, include: Callable[[RefinementNode], bool]) -> List[int]:
    """Return the point-id chain selected by a threshold-stopped traversal.

    Descent into a subtree stops as soon as its root fails ``include``;
    the chain always starts at p_begin and ends at p_end.
    """
    chain = [tree.p_begin]

    def visit(node: Optional[RefinementNode]):
        if node is None or not include(node):
            return
        visit(node.left)
        chain.append(node.point_id)
        visit(node.right)

    visit(tree.root)
    chain.append(tree.p_end)
    return chain


def saturate_tree(tree: RefinementTree) -> RefinementTree:
    """One post-order pass computing e_hat, d_max and d_max_hat per node.

    e_hat is the subtree error maximum and d_max the farthest descendant
    distance from the node's own position.  d_max_hat additionally chains
    the child distance: max(d_max, dist(node, child) + d_max_hat(child)).
    The additive form is what makes the runtime threshold test strictly
    ancestor-monotone for any camera; a plain subtree maximum of d_max is
    not (the gap between a node and a far child can exceed the difference
    of their d_max values).
    """

    def visit(node: Optional[RefinementNode]):
        # returns descendant point ids including self
        if node is None:
            return []
        left_pts = visit(node.left)
        right_pts = visit(node.right)
        node.e_hat = node.e
        px, py = tree.local(node.point_id)
        node.d_max = 0.0
        for pid in left_pts + right_pts:
            qx, qy = tree.local(pid)
            d = math.hypot(px - qx, py - qy)
            if d > node.d_max:
                node.d_max = d
        node.d_max_hat = node.d_max
        for child in (node.left, node.right):
            if child is not None:
                if child.e_hat > node.e_hat:
                    node.e_hat = child.e_hat
                cx, cy = tree.local(child.point_id)
                chained = math.hypot(px - cx, py - cy) + child.d_max_hat
                if chained > node.d_max_hat:
                    node.d_max_hat = chained
        return left_pts + right_pts + [node.point_id]

    visit(tree.root)
    tree.saturated = True
    return tree


def reference_simplify(tree: RefinementTree, camera: CameraPose, policy) -> List[int]:
    """Oracle chain: include a node iff e_hat > epsilon(d - d_max_hat).

    ``policy`` is any object with an ``epsilon(d)`` method; the argument is
    clamped below at zero inside the policy.
    """
    if not tree.saturated:
        raise ValueError("tree must be saturated before simplification")

    def include(node: RefinementNode) -> bool:
        d = eye_distance(camera, tree.local(node.point_id))
        return node.e_hat > policy.epsilon(d - node.d_max_hat)

    return traverse_with_threshold(tree, include)
