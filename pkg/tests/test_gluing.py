import numpy as np
import pydantic
from pytest import approx, mark, raises

from slaglab import canonical, gluing
from slaglab.exceptions import (ConfigError, DomainError, GuardedStepError,
                                InsufficientDataError, PreconditionError)


@mark.parametrize("order", gluing.CUTOFF_ORDERS)
def test_cutoff_endpoints_and_monotonicity(order):
    r = np.linspace(0.2, 1.3, 221)
    chi, d1, d2 = gluing.cutoff(r, 0.5, 1.0, order, derivatives=True)
    assert np.all(np.diff(chi) >= 0)
    np.testing.assert_array_equal(chi[r <= 0.5], 0.0)
    np.testing.assert_array_equal(chi[r >= 1.0], 1.0)
    ends = np.array([0.5, 1.0])
    _, e1, e2 = gluing.cutoff(ends, 0.5, 1.0, order, derivatives=True)
    np.testing.assert_array_equal(e1, 0.0)
    np.testing.assert_array_equal(e2, 0.0)


@mark.parametrize("order", gluing.CUTOFF_ORDERS)
def test_cutoff_derivatives(order):
    r, h = np.array([0.61, 0.75, 0.93]), 1e-6
    _, d1, d2 = gluing.cutoff(r, 0.5, 1.0, order, derivatives=True)
    fd1 = (gluing.cutoff(r + h, 0.5, 1.0, order) - gluing.cutoff(r - h, 0.5, 1.0, order)) / (2 * h)
    _, up, _ = gluing.cutoff(r + h, 0.5, 1.0, order, derivatives=True)
    _, down, _ = gluing.cutoff(r - h, 0.5, 1.0, order, derivatives=True)
    np.testing.assert_allclose(d1, fd1, rtol=1e-6)
    np.testing.assert_allclose(d2, (up - down) / (2 * h), rtol=1e-5, atol=1e-6)


def test_cutoff_errors():
    with raises(ConfigError):
        gluing.cutoff(0.7, 1.0, 0.5)
    with raises(ConfigError):
        gluing.cutoff(0.7, 0.5, 1.0, order=6)


def test_glued_potential_branches():
    pot = gluing.GluedPotential(0.01, 0.5, 1.0)
    inner = np.array([0.01, 0.2])
    outer = np.array([1.0, 2.5])
    for got, want in zip(pot.profile(inner), canonical.eh_value(inner, 0.01)):
        np.testing.assert_allclose(got, want, rtol=1e-15)
    H, H1, H2 = pot.profile(outer)
    np.testing.assert_array_equal(H, outer)
    np.testing.assert_array_equal(H1, 1.0)
    np.testing.assert_array_equal(H2, 0.0)
    assert [pot.region(U) for U in (0.1, 0.5, 1.5)] == ['eh', 'annulus', 'flat']
    with raises(DomainError):
        pot.profile(np.array([0.0]))
    with raises(ConfigError):
        gluing.GluedPotential(0.01, 1.0, 1.0)


def test_glued_potential_is_c2_across_the_annulus():
    pot = gluing.GluedPotential(0.05, 0.5, 1.0)
    eps = 1e-9
    inside = np.array([0.25 + eps, 1.0 - eps])
    edges = np.array([0.25, 1.0])
    for got, want in zip(pot.profile(inside), pot.profile(edges)):
        np.testing.assert_allclose(got, want, atol=1e-7)


def test_glued_potential_chain_rule():
    pot = gluing.GluedPotential(0.05, 0.5, 1.0)
    U, h = np.array([0.3, 0.5, 0.8]), 1e-6
    _, H1, H2 = pot.profile(U)
    Hp, H1p, _ = pot.profile(U + h)
    Hm, H1m, _ = pot.profile(U - h)
    np.testing.assert_allclose(H1, (Hp - Hm) / (2 * h), rtol=1e-7)
    np.testing.assert_allclose(H2, (H1p - H1m) / (2 * h), rtol=1e-5, atol=1e-8)


def test_glued_metric_is_positive():
    report = gluing.glued_metric_positivity(gluing.NeckConfig())
    assert report.positive
    assert 0 < report.min_eigenvalue <= 1.0
    assert 0.25 <= report.radius <= 1.5
    assert report.samples == 161 * 4


def test_neck_config_validation():
    with raises(pydantic.ValidationError):
        gluing.NeckConfig(r0=1.0, r1=0.5)
    with raises(pydantic.ValidationError):
        gluing.NeckConfig(a=-0.1)
    with raises(pydantic.ValidationError):
        gluing.NeckConfig(a_vector=[0.01] * 15)
    with raises(pydantic.ValidationError):
        gluing.NeckConfig(cutoff_order=6)
    with raises(pydantic.ValidationError):
        gluing.NeckConfig(a_list=[])
    config = gluing.NeckConfig(a_vector=[0.001 * (k + 1) for k in range(16)])
    assert config.a_for(3) == approx(0.004)
    assert gluing.NeckConfig(a=0.02).a_for(3) == 0.02


def test_ricci_defect_scan():
    scan = gluing.ricci_defect_scan(gluing.NeckConfig(), radii=[0.3, 0.75, 1.4])
    assert scan.outside_sup < 1e-6
    assert scan.annulus_sup > 1e-7
    assert [row['r'] for row in scan.rows()] == [0.3, 0.75, 1.4]
    with raises(PreconditionError):
        gluing.ricci_defect_scan(gluing.NeckConfig(), radii=[0.2])


def test_neck_discrepancy_scales_like_a_squared():
    config = gluing.NeckConfig()
    report = gluing.scaling_probe(config.a_list, config, ricci=False)
    assert report.potential_exponent == approx(2.0, abs=0.05)
    assert report.ricci_sups is None
    assert gluing.neck_discrepancy(0.0, config) == 0.0
    with raises(InsufficientDataError):
        gluing.scaling_probe([0.1, 0.05], config)


def test_ricci_defect_scales_like_a_squared():
    config = gluing.NeckConfig()
    report = gluing.scaling_probe(config.a_list, config)
    assert report.ricci_exponent == approx(2.0, abs=0.25)


def _atlas(orbifold, **kwargs):
    return gluing.NeckAtlas(orbifold, gluing.NeckConfig(**dict(dict(r0=0.1, r1=0.2), **kwargs)))


def test_atlas_is_flat_away_from_curves(orbifold):
    atlas = _atlas(orbifold)
    z = np.array([[0.375, 0.5, 0.25]])
    assert not atlas.in_neck(z)[0]
    np.testing.assert_array_equal(atlas.hessian_many(z)[0], np.eye(3))


def test_atlas_uses_glued_metric_near_one_curve(orbifold):
    atlas = _atlas(orbifold)
    z = np.array([[0.1, 0.5, 0.05]])
    assert atlas.in_neck(z)[0]
    g = atlas.hessian_many(z)[0]
    expected = gluing.GluedPotential(0.01, 0.1, 0.2, flat_dim=0).hessian([0.1, 0.05])
    np.testing.assert_allclose(g[np.ix_([0, 2], [0, 2])], expected, atol=1e-15)
    assert g[1, 1] == 1.0
    assert g[0, 1] == 0.0


def test_atlas_rejects_points_in_two_necks(orbifold):
    atlas = _atlas(orbifold)
    with raises(GuardedStepError):
        atlas.hessian_many([[0.125, 0.25, 0.0]])


def test_atlas_normal_coordinates(orbifold):
    atlas = _atlas(orbifold)
    w = atlas.normal_coordinates([[0.1, 0.5, 0.05]])
    assert w.shape == (1, 32, 2)
    U = np.sum(np.abs(w) ** 2, axis=-1)[0]
    assert U.min() == approx(0.0125)


def test_atlas_on_a_fixed_curve_is_a_precondition_error(orbifold):
    atlas = _atlas(orbifold)
    with raises(PreconditionError):
        atlas.hessian_many([[0.0, 0.5, 0.0]])
    # just off the curve the block is defined
    g = atlas.hessian_many([[1e-6, 0.5, 0.0]])[0]
    assert np.all(np.isfinite(g))


def _chart_pullback(radial, direction, p, q):
    # g in (p, q) pulled back from the normal coordinates through w_d = √p, w_other = q√p
    root = np.sqrt(p + 0j)
    w = np.empty(2, dtype=complex)
    w[direction], w[1 - direction] = root, q * root
    J = np.zeros((2, 2), dtype=complex)
    J[direction, 0] = 0.5 / root
    J[1 - direction, 0] = 0.5 * q / root
    J[1 - direction, 1] = root
    return J.T @ radial.hessian(w) @ J.conj()


@mark.parametrize("direction", [0, 1])
@mark.parametrize("p, q", [(0.003 * np.exp(0.4j), 0.7 - 0.2j),
                           (0.02 * np.exp(1j), 0.3 + 0.1j),
                           (0.05 + 0j, 0.5j)])
def test_blowup_chart_metric_is_the_pullback(direction, p, q):
    radial = gluing.GluedPotential(0.01, 0.1, 0.2, flat_dim=0)
    pot = gluing.BlowupChartPotential(radial, direction)
    z = np.zeros(3, dtype=complex)
    z[list(pot.slots)] = p, q
    z[1] = 0.3 + 0.2j
    g = pot.hessian(z)
    i, j = pot.slots
    block = g[np.ix_([i, j], [i, j])]
    np.testing.assert_allclose(block, _chart_pullback(radial, direction, p, q), rtol=1e-8, atol=1e-12)
    assert g[1, 1] == 1.0
    assert g[1, i] == 0.0


@mark.parametrize("p, q", [(0.003 * np.exp(0.4j), 0.7 - 0.2j), (0.05 + 0j, 0.5j), (0.0, 0.4)])
def test_blowup_chart_volume_is_constant_where_ricci_flat(p, q):
    pot = gluing.BlowupChartPotential(gluing.GluedPotential(0.01, 0.1, 0.2, flat_dim=0), 0)
    g = pot.hessian(np.array([p, 0.0, q], dtype=complex))
    block = g[np.ix_([0, 2], [0, 2])]
    assert np.linalg.det(block).real == approx(0.25, rel=1e-10)
    assert abs(np.linalg.det(block).imag) < 1e-12


def test_blowup_chart_metric_is_smooth_on_the_divisor():
    a, q = 0.01, 0.4 - 0.3j
    pot = gluing.BlowupChartPotential(gluing.GluedPotential(a, 0.1, 0.2, flat_dim=0), 0)
    A = 1 + abs(q) ** 2
    on = pot.hessian(np.array([0.0, 0.0, q]))
    assert on[0, 0].real == approx(A * A / (4 * a))
    assert on[0, 2] == 0.0
    assert on[2, 2].real == approx(a / A ** 2)
    near = pot.hessian(np.array([1e-9, 0.0, q]))
    np.testing.assert_allclose(near, on, rtol=1e-6, atol=1e-9)
    assert not pot.is_admissible([0.0, 0.0, q])
    with raises(PreconditionError):
        gluing.BlowupChartPotential(gluing.GluedPotential(a, 0.1, 0.2, flat_dim=0), 2)
    cone = gluing.BlowupChartPotential(gluing.GluedPotential(0.0, 0.1, 0.2, flat_dim=0), 0)
    with raises(DomainError):
        cone.hessian(np.array([0.0, 0.0, q]))
