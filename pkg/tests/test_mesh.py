import math

import numpy as np
import pytest

from reebkit.generators import gen_sphere, gen_torus
from reebkit.mesh import (MeshError, TriMesh, farthest_point_landmarks, geodesic_distances, load_mesh,
                          mesh_stats, save_off)


def octahedron():
    v = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    f = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    return TriMesh(v, f)


def tetrahedron(shift=0.0):
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float) + shift
    f = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return v, f


def test_octahedron_counts():
    m = octahedron()
    assert (m.n_vertices, m.n_edges, m.n_triangles, m.euler) == (6, 12, 8, 2)
    assert m.is_connected


def test_two_tetrahedra_are_two_components():
    v1, f1 = tetrahedron()
    v2, f2 = tetrahedron(5.0)
    m = TriMesh(np.vstack([v1, v2]), np.vstack([f1, np.array(f2) + 4]))
    assert m.components == 2
    assert not m.is_connected
    with pytest.raises(MeshError):
        m.require_connected()


def test_off_round_trip(tmp_path):
    m = gen_sphere(1.0, 2)
    save_off(m, tmp_path / "s.off")
    back = load_mesh(tmp_path / "s.off")
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)


@pytest.mark.parametrize("text, where", [
    ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 3\n", ":6:"),
    ("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n", ":4:"),
    ("PLY\n", ":1:"),
    ("OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n", "non-manifold"),
    ("OFF\n3 1 0\n0 0 0\n", "file ended"),
])
def test_off_errors_name_the_line(tmp_path, text, where):
    p = tmp_path / "bad.off"
    p.write_text(text)
    with pytest.raises(MeshError, match=where):
        load_mesh(p)


def test_missing_file(tmp_path):
    with pytest.raises(MeshError, match="no such file"):
        load_mesh(tmp_path / "nope.off")


def test_icosphere_size_and_area():
    m = gen_sphere(2.0, 3)
    assert m.n_vertices == 642
    assert m.triangle_areas().sum() == pytest.approx(16 * math.pi, rel=0.02)


def test_torus_area():
    m = gen_torus(2.0, 0.5)
    assert m.triangle_areas().sum() == pytest.approx(4 * math.pi ** 2, rel=0.02)


def pole_to_pole(m, subdivision):
    north = int(np.argmax(m.vertices[:, 2]))
    south = int(np.argmin(m.vertices[:, 2]))
    return geodesic_distances(m, [north], subdivision)[south]


def test_pole_to_pole_default_subdivision(sphere3):
    assert pole_to_pole(sphere3, 4) == pytest.approx(math.pi, rel=0.03)


def test_pole_to_pole_single_segment(sphere3):
    # plain edge graph: zig-zag paths overshoot by a few percent
    d = pole_to_pole(sphere3, 1)
    assert math.pi <= d <= 1.06 * math.pi


def test_geodesics_symmetric_and_triangle_inequality(sphere3, rng):
    D = sphere3.steiner().vertex_all_pairs()
    assert np.array_equal(D, D.T)
    i, j, k = rng.integers(sphere3.n_vertices, size=(3, 1000))
    assert np.all(D[i, k] <= D[i, j] + D[j, k] + 1e-12)


def test_nested_subdivision_is_monotone(sphere3):
    src = [0, 5, 77]
    d2 = geodesic_distances(sphere3, src, 2).distances
    d4 = geodesic_distances(sphere3, src, 4).distances
    assert np.all(d4 <= d2 + 1e-12)


def test_source_validation(sphere3):
    with pytest.raises(ValueError):
        geodesic_distances(sphere3, [])
    with pytest.raises(IndexError):
        geodesic_distances(sphere3, [sphere3.n_vertices])
    with pytest.raises(ValueError):
        geodesic_distances(sphere3, [0], 0)


def test_landmark_diameter_is_lower_bound(sphere3):
    exact = mesh_stats(sphere3, "exact")
    approx = mesh_stats(sphere3, "landmarks", landmarks=4)
    assert approx.diameter_is_lower_bound and not exact.diameter_is_lower_bound
    assert approx.diameter <= exact.diameter
    assert exact.diameter == pytest.approx(math.pi, rel=0.03)


def test_landmarks_cover():
    m = gen_sphere(1.0, 2)
    chosen, rows = farthest_point_landmarks(m, 8)
    assert len(set(chosen.tolist())) == 8
    # every vertex is within the covering radius of some landmark
    cover = rows.min(axis=0)
    assert cover.max() <= rows[:, chosen].max()


def test_relabel_preserves_distances(sphere3, rng):
    perm = rng.permutation(sphere3.n_vertices)
    m2 = sphere3.relabeled(perm)
    d1 = geodesic_distances(sphere3, [0]).distances
    d2 = geodesic_distances(m2, [int(perm[0])]).distances
    assert d2[perm] == pytest.approx(d1, abs=1e-12)


def test_closed_cover_diameter(sphere3):
    # overlapping height bands form a chain cover; the diameter is at most the sum of band diameters
    D = sphere3.steiner().vertex_all_pairs()
    z = sphere3.vertices[:, 2]
    edges = np.linspace(-1.0, 1.0, 5)
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        band = np.flatnonzero((z >= lo - 0.05) & (z <= hi + 0.05))
        total += D[np.ix_(band, band)].max()
    assert D.max() <= total
