import json

import numpy as np
import pytest

from reebkit.field import ScalarField, criticality_scan, height_field, make_excellent
from reebkit.generators import gen_genus2, gen_torus
from reebkit.reeb import (GraphPoint, ReebError, ReebGraph, build_reeb, preimage_connected, reeb_distance,
                          separates, split_points)


def y_tree():
    # min 0 -> saddle 1 -> two maxima 2, 3
    return ReebGraph([0.0, 1.0, 3.0, 2.0], [0, 1, 2, 3], [(0, 1), (1, 2), (1, 3)])


def loop():
    # min 0 -> split 1 -> two parallel arcs -> merge 2 -> max 3
    return ReebGraph([0.0, 1.0, 2.0, 3.0], [0, 1, 2, 3], [(0, 1), (1, 2), (1, 2), (2, 3)])


def test_tree_distances():
    g = y_tree()
    assert g.distance(g.node_point(2), g.node_point(3)) == pytest.approx(3.0)
    a, b = g.point(1, 2.5), g.point(2, 1.5)
    assert g.distance(a, b) == pytest.approx(2.0)
    assert g.distance(a, g.point(1, 1.2)) == pytest.approx(1.3)
    assert reeb_distance(g, a, a) == 0.0


def test_cycle_distances_use_shorter_side():
    g = loop()
    a, b = g.point(1, 1.5), g.point(2, 1.5)
    assert g.distance(a, b) == pytest.approx(1.0)
    assert g.b1_graph == 1
    assert list(g.degrees) == [1, 3, 3, 1]


def test_pairwise_matches_distance(torus_reeb, rng):
    g, q = torus_reeb
    i, j = rng.integers(len(q.points), size=(2, 30))
    D = g.pairwise(g.point_arrays([q[k] for k in i]), g.point_arrays([q[k] for k in j]))
    for a in range(len(i)):
        for b in range(len(j)):
            assert D[a, b] == pytest.approx(g.distance(q[i[a]], q[j[b]]), abs=1e-12)


def test_point_validation():
    g = y_tree()
    assert g.point(0, 0.0).is_node
    with pytest.raises(ReebError):
        g.point(0, 2.0)
    with pytest.raises(ReebError):
        reeb_distance(g, GraphPoint(0.5, arc=7), g.node_point(0))
    with pytest.raises(ReebError):
        ReebGraph([1.0, 0.0], [0, 1], [(0, 1)])


def test_separates_on_tree():
    g = y_tree()
    top_a, top_b = g.node_point(2), g.node_point(3)
    assert separates(g, [g.node_point(1)], top_a, top_b)
    assert separates(g, [g.point(1, 2.0)], top_a, g.node_point(0))
    assert not separates(g, [g.point(2, 1.5)], top_a, g.node_point(0))


def test_separates_on_cycle():
    g = loop()
    bottom, top = g.node_point(0), g.node_point(3)
    assert not separates(g, [g.point(1, 1.5)], bottom, top)
    assert separates(g, [g.point(1, 1.5), g.point(2, 1.5)], bottom, top)


def test_split_points_on_tree_is_single_point():
    g = y_tree()
    path = g.shortest_path(g.node_point(2), g.node_point(3))
    pts = split_points(g, g.node_point(0), path)
    assert len(pts) == 1
    assert pts[0].key() == g.node_point(1).key()


def test_split_points_on_cycle():
    g = loop()
    theta = g.node_point(0)
    path = [g.node_point(3), g.node_point(2), g.point(1, 1.5), g.node_point(1), g.point(2, 1.5)]
    pts = split_points(g, theta, path)
    assert 1 <= len(pts) <= 2 * g.b1_graph + 1
    assert separates(g, [pts[0]], path[0], theta)
    assert separates(g, [pts[-1]], path[-1], theta)


def test_split_points_rejects_high_degree():
    g = ReebGraph([0.0, 1.0, 2.0, 2.5, 3.0], range(5), [(0, 1), (1, 2), (1, 3), (1, 4)])
    with pytest.raises(ReebError):
        split_points(g, g.node_point(0), [g.node_point(2), g.node_point(1), g.node_point(3)])


def test_sphere_graph_is_one_arc(sphere3_reeb):
    g, q = sphere3_reeb
    assert (g.n_nodes, g.n_arcs) == (2, 1)
    assert g.lengths[0] == pytest.approx(2.0, rel=1e-3)


def test_standing_torus_graph(torus_reeb):
    g, q = torus_reeb
    assert sorted(g.degrees.tolist()) == [1, 1, 3, 3]
    assert g.b1_graph == 1
    assert all(preimage_connected(g, q, a) for a in range(g.n_arcs))


def test_lying_torus_graph():
    f = make_excellent(height_field(gen_torus(orientation="lying")))
    g, q = build_reeb(f)
    assert g.b1_graph <= 2
    assert g.degrees.max() <= 3
    assert g.is_connected


def test_genus2_graph():
    m = gen_genus2()
    f = make_excellent(height_field(m))
    g, q = build_reeb(f)
    scan = criticality_scan(f)
    assert g.b1_graph == 2
    assert g.degrees.max() <= 3
    # simple critical points map one-to-one onto nodes
    assert g.n_nodes == len(scan.critical_vertices)


def test_quotient_is_lipschitz(torus_reeb, torus_height, rng):
    g, q = torus_reeb
    mesh = torus_height.mesh
    src = rng.choice(mesh.n_vertices, 20, replace=False)
    D = mesh.steiner().sweeps(src)[:, :mesh.n_vertices]
    L = torus_height.gradient_L
    for i, s in enumerate(src):
        for t in rng.choice(mesh.n_vertices, 50, replace=False):
            assert g.distance(q[s], q[t]) <= L * D[i, t] + 1e-12


def test_values_are_one_lipschitz_on_graph(torus_reeb, rng):
    g, _ = torus_reeb
    ulps = 8 * np.spacing(np.abs(g.node_values).max())
    for _ in range(500):
        pts = []
        for _ in range(2):
            a = int(rng.integers(g.n_arcs))
            lo, hi = g.node_values[g.arcs[a]]
            pts.append(g.point(a, float(rng.uniform(lo, hi))))
        assert abs(pts[0].value - pts[1].value) <= g.distance(*pts) + ulps


def test_quotient_values_match_field(torus_reeb, torus_height):
    _, q = torus_reeb
    vals = np.array([p.value for p in q.points])
    assert np.array_equal(vals, torus_height.values)


def test_coarse_levels_keep_degrees_low():
    # coarse rounding creates plateaus and multi-saddles after tie-breaking
    m = gen_genus2()
    f = make_excellent(ScalarField(m, np.round(m.vertices[:, 2], 1)), epsilon=1e-6, delta=1e-3)
    g, q = build_reeb(f)
    assert g.degrees.max() <= 3
    assert g.b1_graph <= 2


def test_exports(torus_reeb):
    g, q = torus_reeb
    d = json.loads(g.to_json(q))
    assert len(d["nodes"]) == g.n_nodes and len(d["edges"]) == g.n_arcs
    assert d["b1_graph"] == 1
    assert len(d["vertex_image"]) == len(q.points)
    dot = g.to_dot()
    assert dot.startswith("graph reeb {") and dot.count(" -- ") == g.n_arcs


def test_shortest_path_length_matches_distance(torus_reeb, rng):
    g, q = torus_reeb
    for _ in range(20):
        a, b = (q[int(i)] for i in rng.integers(len(q.points), size=2))
        path = g.shortest_path(a, b)
        length = sum(abs(u.value - v.value) for u, v in zip(path, path[1:]))
        assert length == pytest.approx(g.distance(a, b), abs=1e-9)
