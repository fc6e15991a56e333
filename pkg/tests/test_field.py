import math

import numpy as np
import pytest

from reebkit.field import (FieldError, InfeasiblePerturbation, ScalarField, criticality_scan, distance_field,
                           epsilon_p, height_field, load_sidecar, make_excellent, save_sidecar)
from reebkit.generators import gen_genus2, gen_sphere, gen_torus
from reebkit.mesh import TriMesh


def south(field):
    return int(np.argmin(field.values))


def test_height_epsilon_on_sphere(sphere3_height):
    # f - d(p, .) = -cos(s) - s along a meridian, s in [0, pi]
    p = south(sphere3_height)
    plain = epsilon_p(sphere3_height, p, optimize_shift=False)
    best = epsilon_p(sphere3_height, p)
    assert plain.eps == pytest.approx(math.pi - 1, rel=0.03)
    assert best.eps == pytest.approx((math.pi - 2) / 2, rel=0.05)
    assert best.eps <= plain.eps


def test_distance_field_has_zero_epsilon(sphere3):
    f = distance_field(sphere3, 0)
    assert epsilon_p(f, 0, optimize_shift=False).eps == 0.0


@pytest.mark.parametrize("make", [lambda: gen_sphere(1.0, 3), gen_torus, gen_genus2])
def test_distance_field_edge_slopes(make):
    m = make()
    assert distance_field(m, 0).lipschitz_L <= 1.05


def test_make_excellent_breaks_ties():
    m = gen_sphere(1.0, 2)
    f = ScalarField(m, np.round(m.vertices[:, 2], 1))
    assert not f.distinct
    g = make_excellent(f, epsilon=1e-6)
    assert g.distinct
    assert np.abs(g.values - f.values).max() < 1e-6
    assert np.all(np.diff(g.values[f.order]) > 0)
    assert make_excellent(g) is g


def test_make_excellent_rejects_bad_arguments(sphere3_height):
    with pytest.raises(FieldError):
        make_excellent(sphere3_height, epsilon=0)


def test_make_excellent_infeasible():
    m = gen_sphere(1.0, 2)
    f = ScalarField(m, np.full(m.n_vertices, 1e6))
    with pytest.raises(InfeasiblePerturbation) as err:
        make_excellent(f, epsilon=1e-300)
    assert err.value.min_epsilon > 0


@pytest.mark.parametrize("make, counts", [
    (lambda: gen_sphere(1.0, 3), (1, 1, 0)),
    (lambda: gen_torus(), (1, 1, 2)),
    (lambda: gen_genus2(), (1, 1, 4)),
])
def test_critical_points_and_index_sum(make, counts):
    m = make()
    scan = criticality_scan(make_excellent(height_field(m)))
    assert (scan.n_min, scan.n_max, scan.saddle_multiplicity) == counts
    assert scan.index_sum == m.euler
    assert scan.excellent


def test_index_sum_of_random_field(torus_standing, rng):
    f = ScalarField(torus_standing, rng.standard_normal(torus_standing.n_vertices))
    assert criticality_scan(f).index_sum == torus_standing.euler


def test_scan_requires_distinct_values(sphere3):
    with pytest.raises(FieldError):
        criticality_scan(ScalarField(sphere3, np.zeros(sphere3.n_vertices)))


def test_flat_pillow_has_unit_slope():
    # two unit squares glued along their boundary, field = x
    v = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 1e-3], [0.5, 0.5, -1e-3]]
    top = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    bottom = [[1, 0, 5], [2, 1, 5], [3, 2, 5], [0, 3, 5]]
    m = TriMesh(v, top + bottom)
    f = ScalarField(m, m.vertices[:, 0])
    assert f.lipschitz_L == pytest.approx(1.0)
    assert f.gradient_L == pytest.approx(1.0)


def test_gradient_bound_dominates_edge_slopes(sphere3_height):
    assert sphere3_height.gradient_L >= sphere3_height.lipschitz_L
    assert sphere3_height.gradient_L == pytest.approx(1.0, abs=0.01)


def test_sidecar_round_trip(tmp_path, sphere3_height):
    save_sidecar(sphere3_height, tmp_path / "f.txt")
    back = load_sidecar(sphere3_height.mesh, tmp_path / "f.txt")
    assert np.array_equal(back.values, sphere3_height.values)


def test_value_count_checked(sphere3):
    with pytest.raises(FieldError):
        ScalarField(sphere3, np.zeros(3))
    with pytest.raises(FieldError):
        ScalarField(sphere3, np.full(sphere3.n_vertices, np.nan))
