import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, mark, raises

from slaglab import canonical, geom, slag
from slaglab.exceptions import PreconditionError, SizeError


def _symmetric(rng, n):
    B = rng.standard_normal((n, n))
    return 0.5 * (B + B.T)


@mark.parametrize("b, c", [(0.0, 0.0), (1.0, 0.0), (0.3, -0.4), (-0.8, 0.9)])
def test_lbc_is_special_lagrangian_flat(b, c):
    rep = geom.slag_defect(geom.FlatPotential(2), geom.HolomorphicVolumeForm.standard(2),
                           slag.lbc_immersion(b, c))
    assert rep.max_defect < 1e-12


@mark.parametrize("a", (1.0, 0.1))
def test_lbc_is_special_lagrangian_eguchi_hanson(a):
    rep = geom.slag_defect(canonical.EguchiHansonPotential(a),
                           geom.HolomorphicVolumeForm.standard(2), slag.lbc_immersion(0.3, -0.4))
    assert rep.omega_sup < 1e-10
    assert rep.im_sup < 1e-10


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0),
       st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2))
def test_lbc_pullback_of_du_is_real(b, c, t):
    du, ddbar = slag.lbc_du_reality(b, c, [t])
    assert du < 1e-12
    assert ddbar < 1e-12


def test_lbc_circles():
    unit = slag.lbc_cp1_circle(1.0, 0.0)
    assert unit.kind == 'circle'
    assert unit.center == 0
    assert unit.radius == 1.0
    printed = slag.lbc_cp1_circle(1.0, 0.0, form='printed')
    assert printed.center == 1.0
    assert printed.radius == approx(math.sqrt(2))
    assert slag.lbc_cp1_circle(0.0, 0.0).kind == 'line'
    assert slag.lbc_cp1_circle(0.5, 0.5, 'printed').coefficients == \
        slag.lbc_cp1_circle(0.5, 0.5).coefficients
    with raises(ValueError):
        slag.lbc_cp1_circle(1.0, 0.0, form='other')


def test_generalized_circle_kinds():
    assert slag.CurveInCP((1.0, 0.0, 0.0, 1.0)).kind == 'empty'
    assert slag.CurveInCP((0.0, 0.0, 0.0, 0.0)).kind == 'plane'
    assert slag.CurveInCP((0.0, 0.0, 0.0, 2.0)).kind == 'empty'
    unit = slag.CurveInCP((1.0, 0.0, 0.0, -1.0))
    np.testing.assert_allclose(unit.distance([[1.0, 0.0], [0.0, 1.0]]), [1.0, 1.0])


@settings(max_examples=50)
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_divisor_trace_lies_on_derived_circle(b, c):
    hom = slag.lbc_divisor_trace(b, c, samples=64)
    assert np.max(np.abs(slag.lbc_cp1_circle(b, c).residual(hom))) < 1e-12


def test_ray_phase():
    result = slag.lbc_ray_phase_check(0.4, -0.3)
    assert result['samples'] > 150
    assert result['max_discrepancy'] < 1e-8
    assert result['max_bound_violation'] < 1e-12


def test_topology_probe():
    probe = slag.lbc_topology_probe(1.0, 0.0)
    assert probe['connected'] and not probe['inconclusive']
    assert probe['arcs_in_disc'] == 1
    assert probe['max_residual'] < 1e-12
    assert slag.lbc_topology_probe(0.0, 2.0)['kind'] == 'line'
    with raises(PreconditionError):
        slag.lbc_topology_probe(1.0, 0.0, R=0.0)


def test_circle_intersections_witness():
    points = slag.circle_intersections(slag.lbc_cp1_circle(1.0, 0.0), slag.lbc_cp1_circle(0.5, 0.0))
    np.testing.assert_allclose(points, [-1.0, 1.0], atol=1e-12)


def test_coverage(rng):
    cover = slag.lbc_coverage(np.linspace(-1.0, 1.0, 201), samples=300, rng=rng, tol=0.02)
    assert cover['covered']
    assert cover['samples'] == 302
    np.testing.assert_allclose(sorted(p[0] for p in cover['witness']['points']), [-1.0, 1.0])
    assert cover['witness']['max_residual'] < 1e-12
    assert slag.lbc_coverage([0.0, 1.0], samples=10, rng=rng)['origin_cover'] == [0.0]
    with raises(PreconditionError):
        slag.lbc_coverage([])


def test_la_symmetry(rng):
    defect, ok = slag.la_symmetry_test(_symmetric(rng, 3))
    assert ok and defect < 1e-12
    defect, ok = slag.la_symmetry_test([[0.0, 1.0], [0.0, 0.0]])
    assert not ok
    assert defect == approx(1.0)


@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_minor_sums_expand_determinant(n, seed):
    A = np.random.default_rng(seed).uniform(-2.0, 2.0, (n, n))
    cond = slag.minor_sum_identity(A)
    scale = max(1.0, abs(cond.determinant))
    assert abs(complex(cond.even_sum, cond.odd_sum) - cond.determinant) < 1e-9 * scale


def test_minor_sum_limits():
    with raises(SizeError):
        slag.minor_sum_identity(np.zeros((13, 13)))
    with raises(PreconditionError):
        slag.minor_sum_identity(np.zeros((2, 3)))
    cond = slag.minor_sum_identity(np.eye(2))
    # det(I + iI) = (1 + i)^2 = 2i
    assert (cond.even_sum, cond.odd_sum) == approx((0.0, 2.0))
    assert (cond.raw_even_sum, cond.raw_odd_sum) == approx((2.0, 2.0))


def test_special_condition(rng):
    A = _symmetric(rng, 4)
    cond = slag.minor_sum_identity(A)
    assert abs(slag.la_special_condition(A, cond.theta)) < 1e-12 * abs(cond.determinant)
    for theta in (0.0, 0.7, 2.5):
        np.testing.assert_allclose(slag.la_special_condition_crosscheck(A, theta),
                                   slag.la_special_condition(A, theta), atol=1e-11)
    with raises(PreconditionError):
        slag.la_special_condition([[0.0, 1.0], [0.0, 0.0]], 0.0)


def test_blowup_equations_vanish_on_graph(rng):
    A = _symmetric(rng, 3)
    for _ in range(10):
        res = slag.la_blowup_equations(A, slag.la_chart_point(A, rng.standard_normal(3)))
        assert res.max_abs < 1e-10
        assert not res.singular
    with raises(PreconditionError):
        slag.la_blowup_equations(A, [1.0, 2.0])
    with raises(PreconditionError):
        slag.la_chart_point(np.zeros((2, 2)), [0.0, 1.0])


def test_diagonal_divisor_equations():
    A = np.diag([1.0, 1.0, 0.0])
    # divisor equations reduce to 2 v2 = 0 and v3 - u3 = 0
    on = slag.la_blowup_equations(A, [0.0, 0.7, 0.4 + 0.4j])
    np.testing.assert_allclose(on.divisor, [0.0, 0.0], atol=1e-15)
    off = slag.la_blowup_equations(A, [0.0, 0.7 + 0.1j, 0.4])
    np.testing.assert_allclose(off.divisor, [0.2, -0.4])
    np.testing.assert_allclose(slag.la_printed_reduction([0.0, 0.7, 0.4 + 0.4j]), [0.7, 0.8])


def test_diagonal_divisor_is_smooth(rng):
    report = slag.la_smoothness_probe(np.diag([1.0, 1.0, 0.0]), samples=30, rng=rng)
    assert report.passed
    assert report.min_singular_value == approx(1.0)
    assert report.min_raw_singular_value == approx(math.sqrt(2))
    assert report.max_residual < 1e-12
    assert report.samples == 30
    with raises(PreconditionError):
        slag.la_smoothness_probe(np.eye(1))


def test_random_divisor_is_smooth(rng):
    report = slag.la_smoothness_probe(_symmetric(rng, 3), samples=50, rng=rng)
    assert report.max_residual < 1e-10
    assert report.samples == 50


def test_calabi_lagrangian(rng):
    assert slag.calabi_lagrangian_check(_symmetric(rng, 3)) < 1e-10


def test_limit_plane():
    report = slag.limit_plane_sequence(np.eye(3), [0.5, -0.2])
    assert report.converges
    assert report.omega_defect < 1e-15
    assert report.phase_gaps[-1] < 1e-3
    basis = slag.limit_plane(np.eye(3), [0.5, -0.2])
    assert basis.shape == (6, 3)
    np.testing.assert_array_equal(basis[:, 0], [1, 0, 0, 0, 0, 0])


def test_graph_projector_is_projection(rng):
    P = slag.graph_projector(_symmetric(rng, 3))
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    assert np.trace(P) == approx(3.0)
