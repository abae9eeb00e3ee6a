"""Intersection-avoidance dependencies and pre-evaluated star terms.

A refinement point may only be simplified away when every point inside its
removal triangle (its dependees) is simplified too, otherwise the coarser
chain can cross other geometry.  Dependee sets are contracted over cycles
into proxy points and folded into two per-point scalars e*, d* so the
runtime test stays a single comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .blg import RefinementNode, RefinementTree
from .geometry import CameraPose, Point, eye_distance, point_in_triangle

GRID_RESOLUTION = 1024  # buckets along the longer bbox axis for dependee search


@dataclass
class ProxyPoint:
    member_ids: FrozenSet[int]
    position: Point
    e_star: float = 0.0
    d_star: float = 0.0


@dataclass
class DependencyData:
    """Final per-point runtime attributes for a preprocessed scene."""

    positions: np.ndarray  # (N, 2) original coordinates
    eval_positions: np.ndarray  # (N, 2) proxy position for cycle members
    e_star: np.ndarray  # (N,)
    d_star: np.ndarray  # (N,)
    dependees: Dict[int, FrozenSet[int]]
    proxies: List[ProxyPoint]
    proxy_of: Dict[int, int]  # member point id -> index into proxies


class PointGrid:
    """Uniform bucket grid over all points for triangle candidate lookup."""

    def __init__(self, positions: np.ndarray):
        self.positions = positions
        if len(positions) == 0:
            self.min = np.zeros(2)
            self.cell = 1.0
            self.buckets: Dict[Tuple[int, int], List[int]] = {}
            return
        self.min = positions.min(axis=0)
        span = positions.max(axis=0) - self.min
        self.cell = max(span.max() / GRID_RESOLUTION, 1e-9)
        self.buckets = {}
        for i, (x, y) in enumerate(positions):
            key = (int((x - self.min[0]) / self.cell), int((y - self.min[1]) / self.cell))
            self.buckets.setdefault(key, []).append(i)

    def query_bbox(self, lo: Point, hi: Point) -> List[int]:
        x0 = int((lo[0] - self.min[0]) / self.cell)
        y0 = int((lo[1] - self.min[1]) / self.cell)
        x1 = int((hi[0] - self.min[0]) / self.cell)
        y1 = int((hi[1] - self.min[1]) / self.cell)
        out: List[int] = []
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                out.extend(self.buckets.get((cx, cy), ()))
        return out


def _interior_nodes(tree: RefinementTree) -> List[RefinementNode]:
    return tree.nodes()


def _triangle_area2(a: Point, b: Point, c: Point) -> float:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def find_dependees(
    node: RefinementNode,
    tree: RefinementTree,
    positions: np.ndarray,
    grid: PointGrid,
) -> Set[int]:
    """All points inside the removal triangle of ``node``.

    The triangle spans the node's baseline endpoints and the node itself.
    Same-polyline descendants of the node are skipped (tree saturation
    already orders them); the triangle's own corner points are not
    witnesses.  A degenerate (zero area) triangle has no interior.
    """
    i = node.point_id
    l, r = node.baseline_left, node.baseline_right
    t1 = tuple(positions[l])
    t2 = tuple(positions[i])
    t3 = tuple(positions[r])
    if _triangle_area2(t1, t2, t3) == 0.0:
        return set()
    lo = (min(t1[0], t2[0], t3[0]), min(t1[1], t2[1], t3[1]))
    hi = (max(t1[0], t2[0], t3[0]), max(t1[1], t2[1], t3[1]))
    out: Set[int] = set()
    for q in grid.query_bbox(lo, hi):
        if q == i or q == l or q == r:
            continue
        # descendants of i span the open baseline interval of the same tree
        if tree.p_begin <= q <= tree.p_end and node.baseline_left < q < node.baseline_right:
            continue
        if point_in_triangle(tuple(positions[q]), t1, t2, t3):
            out.add(q)
    return out


def build_dependency_graph(
    dependees: Dict[int, FrozenSet[int]],
    tree_edges: Sequence[Tuple[int, int]] = (),
) -> nx.DiGraph:
    """Directed graph: an edge i -> j means i may be excluded only if j is."""
    g = nx.DiGraph()
    for i, deps in dependees.items():
        g.add_node(i)
        for j in deps:
            g.add_edge(i, j)
    for parent, child in tree_edges:
        g.add_edge(parent, child)
    return g


def compute_star_terms(
    graph: nx.DiGraph,
    positions: np.ndarray,
    base_e: np.ndarray,
    base_d: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[ProxyPoint], Dict[int, int]]:
    """Fold the dependency DAG into per-point e*, d* and proxy positions.

    Strongly connected components of size >= 2 collapse into proxy points
    (mean position, shared maximized attributes); the remaining DAG is
    processed dependees-first so the max/plus recurrence composes
    transitively.
    """
    n = len(positions)
    e_star = base_e.copy()
    d_star = base_d.copy()
    eval_pos = positions.copy()
    proxies: List[ProxyPoint] = []
    proxy_of: Dict[int, int] = {}
    if graph.number_of_nodes() == 0:
        return e_star, d_star, eval_pos, proxies, proxy_of

    # every referenced point participates, even sinks with no outgoing edges
    cond = nx.condensation(graph)
    order = list(nx.topological_sort(cond))
    comp_e: Dict[int, float] = {}
    comp_d: Dict[int, float] = {}
    comp_pos: Dict[int, np.ndarray] = {}
    for c in reversed(order):
        members = sorted(cond.nodes[c]["members"])
        pos = positions[members].mean(axis=0)
        if len(members) == 1:
            pos = positions[members[0]]
        e_val = -math.inf
        d_val = 0.0
        for m in members:
            e_val = max(e_val, base_e[m])
            d_val = max(d_val, math.hypot(*(pos - positions[m])) + base_d[m])
        for m in members:
            for j in sorted(graph.successors(m)):
                cj = cond.graph["mapping"][j]
                if cj == c:
                    continue
                e_val = max(e_val, comp_e[cj])
                d_val = max(d_val, math.hypot(*(pos - comp_pos[cj])) + comp_d[cj])
        comp_e[c] = e_val
        comp_d[c] = d_val
        comp_pos[c] = pos
        if len(members) >= 2:
            proxy = ProxyPoint(
                member_ids=frozenset(members),
                position=(float(pos[0]), float(pos[1])),
                e_star=e_val,
                d_star=d_val,
            )
            for m in members:
                proxy_of[m] = len(proxies)
            proxies.append(proxy)
        for m in members:
            e_star[m] = e_val
            d_star[m] = d_val
            eval_pos[m] = pos
    return e_star, d_star, eval_pos, proxies, proxy_of


def analyze_scene(
    trees: Sequence[RefinementTree], dependee_analysis: bool = True
) -> DependencyData:
    """Full dependee preprocessing over a set of saturated trees.

    With ``dependee_analysis`` off the triangle search is skipped and the
    star terms reduce to the per-tree saturated attributes; simplification
    then gives no intersection-avoidance guarantee.
    """
    n = sum(len(t.points) for t in trees)
    positions = np.empty((n, 2), dtype=np.float64)
    base_e = np.zeros(n, dtype=np.float64)
    base_d = np.zeros(n, dtype=np.float64)
    endpoint = np.zeros(n, dtype=bool)
    for tree in trees:
        for li, p in enumerate(tree.points):
            positions[tree.p_begin + li] = p
        endpoint[tree.p_begin] = True
        endpoint[tree.p_end] = True
    # polyline endpoints are always drawn: as dependees they pin their
    # dependents to permanent inclusion
    base_e[endpoint] = math.inf

    node_of: Dict[int, Tuple[RefinementNode, RefinementTree]] = {}
    tree_edges: List[Tuple[int, int]] = []
    for tree in trees:
        for node in tree.nodes():
            base_e[node.point_id] = node.e_hat
            base_d[node.point_id] = node.d_max_hat
            node_of[node.point_id] = (node, tree)
            for child in (node.left, node.right):
                if child is not None:
                    tree_edges.append((node.point_id, child.point_id))

    dependees: Dict[int, FrozenSet[int]] = {}
    if dependee_analysis:
        grid = PointGrid(positions)
        for pid in sorted(node_of):
            node, tree = node_of[pid]
            deps = find_dependees(node, tree, positions, grid)
            if deps:
                dependees[pid] = frozenset(deps)

    graph = build_dependency_graph(dependees, tree_edges)
    e_star, d_star, eval_pos, proxies, proxy_of = compute_star_terms(
        graph, positions, base_e, base_d
    )
    return DependencyData(
        positions=positions,
        eval_positions=eval_pos,
        e_star=e_star,
        d_star=d_star,
        dependees=dependees,
        proxies=proxies,
        proxy_of=proxy_of,
    )


def exclusion_test(point_id: int, camera: CameraPose, policy, data: DependencyData) -> bool:
    """True iff the point may be left out at this camera and threshold."""
    d = eye_distance(camera, tuple(data.eval_positions[point_id]))
    return data.e_star[point_id] <= policy.epsilon(d - data.d_star[point_id])
