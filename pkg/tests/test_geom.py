import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import mark, raises

from slaglab import canonical, geom, util
from slaglab.exceptions import (DegenerateMetricError, DimensionMismatch, DomainError,
                                ImmersionError)


def _fiber():
    return geom.AffineImmersion(np.array([0.3, 0.4, 0.6], dtype=complex), 1j * np.eye(3),
                                util.ParameterBox.cube(3), 4)


def test_flat_metric_is_identity(rng):
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    g = geom.metric_from_potential(geom.FlatPotential(3), z)
    np.testing.assert_array_equal(g.entries, np.eye(3))
    assert g.is_positive_definite
    assert g.det == 1.0


def test_hermitian_metric_validation():
    with raises(DegenerateMetricError):
        geom.HermitianMetric([[1.0, 1.0j], [1.0j, 1.0]])
    with raises(DimensionMismatch):
        geom.HermitianMetric(np.ones((2, 3)))
    with raises(DegenerateMetricError):
        geom.HermitianMetric(np.diag([1.0, -1.0])).log_det()


def test_chart_dimension_mismatch():
    with raises(DimensionMismatch):
        geom.metric_from_potential(geom.FlatPotential(3), np.zeros(2))


def test_eh_needs_positive_u():
    with raises(DomainError):
        geom.metric_from_potential(canonical.EguchiHansonPotential(1.0, flat_dim=1), [0, 0, 1.0])


def test_unit_eguchi_hanson_metric():
    r2 = math.sqrt(2.0)
    g = geom.metric_from_potential(canonical.EguchiHansonPotential(1.0), [1.0, 0.0])
    np.testing.assert_allclose(g.entries, np.diag([1 / r2, r2]), rtol=1e-14)
    g = geom.metric_from_potential(canonical.EguchiHansonPotential(1.0, flat_dim=1), [1.0, 0.0, 5.0])
    np.testing.assert_allclose(g.entries, np.diag([1 / r2, r2, 1.0]), rtol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2.0, 2.0), min_size=6, max_size=6),
       st.floats(0.05, 2.0))
def test_exact_hessian_matches_finite_differences(coords, a):
    z = np.array(coords[:3]) + 1j * np.array(coords[3:])
    if np.linalg.norm(z[:2]) < 0.3:
        z[0] += 0.5
    eh = canonical.EguchiHansonPotential(a, flat_dim=1)
    exact = geom.metric_from_potential(eh, z).entries
    fd = geom.metric_by_finite_differences(eh, z).entries
    np.testing.assert_allclose(fd, exact, atol=1e-5)


def test_ricci_form_of_flat_metric_vanishes(rng):
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    np.testing.assert_allclose(geom.ricci_form(geom.FlatPotential(2), z, 1e-3), 0.0, atol=1e-12)


@mark.parametrize("z", ([1.0, 0.5j, 0.2], [0.3 - 0.4j, 0.2, -1.0j], [2.0, 1.0, 0.0]))
def test_eguchi_hanson_is_ricci_flat(z):
    eh = canonical.EguchiHansonPotential(1.0, flat_dim=1)
    assert np.linalg.norm(geom.ricci_form(eh, np.array(z, dtype=complex), 1e-4)) < 1e-5


def test_complex_line_pulls_back_the_area_form():
    line = geom.AffineImmersion(np.zeros(2), [[1.0, 1j], [0.0, 0.0]])
    M = geom.pullback_two_form(geom.FlatPotential(2), line, [0.2, 0.3])
    np.testing.assert_allclose(M, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-15)
    assert math.isclose(float(geom.two_form_norm(M)), 1.0)


def test_real_plane_is_lagrangian():
    plane = geom.AffineImmersion(np.zeros(2), np.eye(2))
    np.testing.assert_array_equal(geom.pullback_two_form(geom.FlatPotential(2), plane, [0.1, 0.1]), 0)
    np.testing.assert_allclose(geom.induced_metric(geom.FlatPotential(2), plane, [0.1, 0.1]), np.eye(2))


def test_volume_form_pullback_of_fiber():
    vol = geom.HolomorphicVolumeForm.standard(3)
    assert abs(geom.pullback_volume_form(vol, _fiber(), [0.5, 0.5, 0.5]) + 1j) < 1e-15
    with raises(DimensionMismatch):
        geom.pullback_volume_form(geom.HolomorphicVolumeForm.standard(2), _fiber(), [0.5] * 3)


def test_volume_form_coefficient_must_not_vanish():
    vol = geom.HolomorphicVolumeForm(geom.ComplexChart(2), lambda zs: zs[:, 0])
    with raises(DomainError):
        vol.coefficient_many(np.zeros((1, 2)))


def test_fiber_is_special_lagrangian():
    rep = geom.slag_defect(geom.FlatPotential(3), geom.HolomorphicVolumeForm.standard(3), _fiber())
    assert rep.max_defect < 1e-15
    assert rep.phase.is_congruent(-math.pi / 2)
    assert rep.samples == 64
    assert set(rep.to_dict()) >= {'omega_sup', 'im_sup', 'theta'}


def test_wrong_phase_is_detected():
    rep = geom.slag_defect(geom.FlatPotential(3), geom.HolomorphicVolumeForm.standard(3), _fiber(),
                           theta=0.0)
    assert math.isclose(rep.im_sup, 1.0)


def test_rank_deficient_jacobian_is_rejected():
    degenerate = geom.AffineImmersion(np.zeros(2), [[1.0, 1.0], [0.0, 0.0]])
    with raises(ImmersionError) as info:
        geom.slag_defect(geom.FlatPotential(2), geom.HolomorphicVolumeForm.standard(2), degenerate,
                        theta=0.0)
    assert info.value.min_singular_value < 1e-12


def test_omega_defect_ignores_parametrization():
    skew = geom.AffineImmersion(np.zeros(2), [[1.0, 0.3 + 0.2j], [0.5j, 1.0]], points_per_axis=3)
    again = geom.ReparametrizedImmersion(skew, [[2.0, 0.5], [0.0, 0.25]], [0.1, -0.2])
    flat = geom.FlatPotential(2)
    vol = geom.HolomorphicVolumeForm.standard(2)
    first = geom.slag_defect(flat, vol, skew)
    second = geom.slag_defect(flat, vol, again)
    assert first.omega_sup > 0.1
    assert math.isclose(first.omega_sup, second.omega_sup, rel_tol=1e-12)
    assert not math.isclose(first.omega_raw_sup, second.omega_raw_sup, rel_tol=1e-3)
