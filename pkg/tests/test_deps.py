import math
import random
from types import SimpleNamespace

import networkx as nx
import numpy as np
import pytest

from linelod.blg import build_tree, saturate_tree
from linelod.deps import (
    PointGrid,
    analyze_scene,
    build_dependency_graph,
    compute_star_terms,
    exclusion_test,
    find_dependees,
)
from linelod.geometry import CameraPose, SourcePolyline, eye_distance, point_in_triangle

from conftest import random_polyline


def make_trees(lines):
    trees = []
    offset = 0
    for i, line in enumerate(lines):
        trees.append(saturate_tree(build_tree(line, polyline_id=i, id_offset=offset)))
        offset += len(line.points)
    return trees


def _policy(slope):
    return SimpleNamespace(epsilon=lambda d: slope * max(d, 0.0))


# scene where the apex of line B sits inside the removal triangle of A's apex
FIG6_A = SourcePolyline(points=((0, 0), (3, 4), (6, 0)))
FIG6_B = SourcePolyline(points=((2, -1), (3, 2), (4, -1)))

# two apexes sitting inside each other's removal triangles (a 2-cycle)
CYCLE_A = SourcePolyline(points=((0, 0), (2.05, 1.08), (4, 0)))
CYCLE_B = SourcePolyline(points=((0, 3), (2.05, 0.98), (4, 3)))


def test_fig6_like_dependee_detected():
    data = analyze_scene(make_trees([FIG6_A, FIG6_B]))
    # A's apex is global id 1, B's apex is global id 4
    assert 4 in data.dependees.get(1, frozenset())


def test_isolated_polyline_no_dependees():
    data = analyze_scene(make_trees([FIG6_A]))
    assert data.dependees == {}


def test_parallel_far_lines_no_dependees():
    a = SourcePolyline(points=((0, 0), (1, 0.5), (2, 0), (3, 0.5)))
    b = SourcePolyline(points=((0, 100), (1, 100.5), (2, 100), (3, 100.5)))
    data = analyze_scene(make_trees([a, b]))
    assert data.dependees == {}


def test_degenerate_triangle_empty():
    line = SourcePolyline(points=((0, 0), (1, 0), (2, 0)))
    other = SourcePolyline(points=((0.5, 0), (1.5, 0.0001)))
    data = analyze_scene(make_trees([line, other]))
    assert 1 not in data.dependees


def test_find_dependees_matches_brute_force():
    rng = random.Random(43)
    for _ in range(20):
        lines = [random_polyline(rng, k=rng.randint(3, 10), span=30.0) for _ in range(4)]
        trees = make_trees(lines)
        n = sum(len(t.points) for t in trees)
        positions = np.empty((n, 2))
        for t in trees:
            for li, p in enumerate(t.points):
                positions[t.p_begin + li] = p
        grid = PointGrid(positions)
        for tree in trees:
            for node in tree.nodes():
                got = find_dependees(node, tree, positions, grid)
                t1 = tuple(positions[node.baseline_left])
                t2 = tuple(positions[node.point_id])
                t3 = tuple(positions[node.baseline_right])
                area2 = abs(
                    (t2[0] - t1[0]) * (t3[1] - t1[1]) - (t2[1] - t1[1]) * (t3[0] - t1[0])
                )
                want = set()
                if area2 != 0.0:
                    for q in range(n):
                        if q in (node.point_id, node.baseline_left, node.baseline_right):
                            continue
                        if (
                            tree.p_begin <= q <= tree.p_end
                            and node.baseline_left < q < node.baseline_right
                        ):
                            continue
                        if point_in_triangle(tuple(positions[q]), t1, t2, t3):
                            want.add(q)
                assert got == want


def test_mutual_pair_becomes_proxy():
    data = analyze_scene(make_trees([CYCLE_A, CYCLE_B]))
    assert 4 in data.dependees.get(1, frozenset())
    assert 1 in data.dependees.get(4, frozenset())
    assert len(data.proxies) == 1
    proxy = data.proxies[0]
    assert proxy.member_ids == frozenset({1, 4})
    # members share attributes and evaluation position
    assert data.e_star[1] == data.e_star[4]
    assert data.d_star[1] == data.d_star[4]
    assert np.array_equal(data.eval_positions[1], data.eval_positions[4])
    want_pos = (np.array([2.05, 1.08]) + np.array([2.05, 0.98])) / 2
    assert np.allclose(data.eval_positions[1], want_pos)


def test_overlapping_cycles_merge_single_proxy():
    positions = np.array([(0, 0), (1, 0), (2, 0)], dtype=float)
    base_e = np.array([1.0, 2.0, 3.0])
    base_d = np.array([0.5, 0.5, 0.5])
    g = build_dependency_graph({0: frozenset({1}), 1: frozenset({0, 2}), 2: frozenset({1})})
    e_star, d_star, eval_pos, proxies, proxy_of = compute_star_terms(g, positions, base_e, base_d)
    assert len(proxies) == 1
    assert proxies[0].member_ids == frozenset({0, 1, 2})
    assert proxy_of == {0: 0, 1: 0, 2: 0}
    assert e_star[0] == e_star[1] == e_star[2] == 3.0


def test_acyclic_chain_star_terms():
    # hand-expanded two-node chain: i depends on j with the larger error
    positions = np.array([(0, 0), (3, 4)], dtype=float)
    base_e = np.array([1.0, 7.0])
    base_d = np.array([2.0, 5.0])
    g = build_dependency_graph({0: frozenset({1})})
    e_star, d_star, eval_pos, proxies, _ = compute_star_terms(g, positions, base_e, base_d)
    assert proxies == []
    assert e_star[0] == 7.0
    assert d_star[0] == pytest.approx(5.0 + 5.0)  # dist(0,1) + d_star(1)
    assert e_star[1] == 7.0 and d_star[1] == 5.0


def test_identity_when_no_dependees():
    positions = np.array([(0, 0), (10, 0)], dtype=float)
    base_e = np.array([4.0, 6.0])
    base_d = np.array([1.0, 2.0])
    g = build_dependency_graph({})
    e_star, d_star, _, proxies, _ = compute_star_terms(g, positions, base_e, base_d)
    assert list(e_star) == [4.0, 6.0]
    assert list(d_star) == [1.0, 2.0]
    assert proxies == []


def star_oracle(graph, positions, base_e, base_d):
    """Memoized transitive-closure expansion (acyclic graphs only)."""
    e_memo, d_memo = {}, {}

    def e(i):
        if i not in e_memo:
            e_memo[i] = max([base_e[i]] + [e(j) for j in graph.successors(i)])
        return e_memo[i]

    def d(i):
        if i not in d_memo:
            vals = [base_d[i]]
            for j in graph.successors(i):
                vals.append(math.hypot(*(positions[i] - positions[j])) + d(j))
            d_memo[i] = max(vals)
        return d_memo[i]

    return e, d


def test_star_terms_match_transitive_closure_oracle():
    rng = random.Random(53)
    checked = 0
    for _ in range(40):
        n = rng.randint(4, 12)
        positions = np.array(
            [(rng.uniform(-50, 50), rng.uniform(-50, 50)) for _ in range(n)]
        )
        base_e = np.array([rng.uniform(0, 10) for _ in range(n)])
        base_d = np.array([rng.uniform(0, 10) for _ in range(n)])
        # random DAG: edges only from lower to higher index
        dependees = {}
        for i in range(n):
            deps = {j for j in range(i + 1, n) if rng.random() < 0.3}
            if deps:
                dependees[i] = frozenset(deps)
        g = build_dependency_graph(dependees)
        e_star, d_star, _, proxies, _ = compute_star_terms(g, positions, base_e, base_d)
        assert proxies == []
        e, d = star_oracle(g, positions, base_e, base_d)
        for i in g.nodes:
            assert e_star[i] == pytest.approx(e(i))
            assert d_star[i] == pytest.approx(d(i))
            checked += 1
    assert checked > 100


def test_star_terms_dominate_tree_terms():
    rng = random.Random(59)
    for _ in range(20):
        lines = [random_polyline(rng, k=rng.randint(3, 8), span=20.0) for _ in range(5)]
        trees = make_trees(lines)
        data = analyze_scene(trees)
        for tree in trees:
            for node in tree.nodes():
                assert data.e_star[node.point_id] >= node.e_hat
                assert data.d_star[node.point_id] >= node.d_max_hat


def test_exclusion_trivial_policies():
    trees = make_trees([FIG6_A])
    data = analyze_scene(trees)
    cam = CameraPose(x=0, y=0, height=10)
    inf_policy = SimpleNamespace(epsilon=lambda d: math.inf)
    zero_policy = SimpleNamespace(epsilon=lambda d: 0.0)
    apex = 1
    assert exclusion_test(apex, cam, inf_policy, data)
    # apex has positive error: never excluded at zero threshold
    assert not exclusion_test(apex, cam, zero_policy, data)


def test_conservative_vs_direct_min_max():
    # whenever the folded test excludes a point, the direct evaluation over
    # the transitive dependee closure also holds, at any camera
    rng = random.Random(67)
    total_excluded = 0
    for _ in range(100):
        lines = [random_polyline(rng, k=rng.randint(3, 8), span=20.0) for _ in range(5)]
        trees = make_trees(lines)
        data = analyze_scene(trees)
        node_of = {}
        for t in trees:
            for nd in t.nodes():
                node_of[nd.point_id] = nd
        dep_graph = build_dependency_graph(data.dependees)
        cam = CameraPose(
            x=rng.uniform(-100, 100), y=rng.uniform(-100, 100), height=rng.uniform(1, 300)
        )
        policy = _policy(rng.uniform(0.001, 0.5))
        for pid, nd in node_of.items():
            if not exclusion_test(pid, cam, policy, data):
                continue
            total_excluded += 1
            closure = {pid}
            if pid in dep_graph:
                closure |= nx.descendants(dep_graph, pid)
            for j in closure:
                jn = node_of.get(j)
                # endpoints in the closure would have pinned pid to inclusion
                assert jn is not None
                d_j = eye_distance(cam, tuple(data.positions[j]))
                assert jn.e_hat <= policy.epsilon(d_j - jn.d_max_hat) + 1e-9
    assert total_excluded > 50


def test_proxy_all_or_nothing():
    data = analyze_scene(make_trees([CYCLE_A, CYCLE_B]))
    rng = random.Random(71)
    assert data.proxies, "fixture must produce a proxy"
    for _ in range(200):
        cam = CameraPose(
            x=rng.uniform(-50, 50), y=rng.uniform(-50, 50), height=rng.uniform(0.5, 200)
        )
        policy = _policy(rng.uniform(0.0001, 2.0))
        for proxy in data.proxies:
            results = {exclusion_test(m, cam, policy, data) for m in proxy.member_ids}
            assert len(results) == 1


def test_endpoint_dependee_pins_inclusion():
    # a short polyline ending inside another line's removal triangle must
    # keep that refinement point forever
    a = SourcePolyline(points=((0, 0), (3, 4), (6, 0)))
    b = SourcePolyline(points=((3, 1.0), (9, 1.0)))  # endpoint (3,1) inside triangle
    data = analyze_scene(make_trees([a, b]))
    assert 3 in data.dependees.get(1, frozenset())
    assert math.isinf(data.e_star[1])
    cam = CameraPose(x=0, y=0, height=10)
    assert not exclusion_test(1, cam, _policy(1000.0), data)
