from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from pytest import approx, mark, raises

from slaglab import geom, util
from slaglab.exceptions import ChartBoundaryError, ConfigError, DomainError, PreconditionError
from slaglab.orbifold import (BlowupChart, EllipticCurve, LatticePoint, Orbifold,
                              blowup_roundtrip, cohomology_pullback,
                              volume_form_in_blowup_chart, volume_form_in_blowup_chart_numeric)


def test_lattice_point_reduces_mod_one():
    p = LatticePoint(Fraction(5, 4), Fraction(-1, 2))
    assert p == (Fraction(1, 4), Fraction(1, 2))
    assert (p + (-p)).is_zero
    assert len(set(LatticePoint(Fraction(1, 2)).halves())) == 4
    with raises(TypeError):
        p + (1, 2)


def test_elliptic_curve_domain():
    with raises(DomainError):
        EllipticCurve(1.0)
    with raises(DomainError):
        EllipticCurve(0.5 - 1j)
    curve = EllipticCurve(0.2 + 1j)
    assert not curve.pure_imaginary
    assert curve.distance(0.1 + 0.1j, 1.3 + 1.1j) == approx(0.0, abs=1e-12)


def test_fixed_curve_counts(orbifold):
    assert len(orbifold.fixed_locus(orbifold.alpha)) == 16
    assert len(orbifold.fixed_locus(orbifold.beta)) == 16
    assert orbifold.fixed_locus(orbifold.alpha_beta) == []
    assert len(orbifold.upstairs_curves()) == 32


def test_singular_set_has_sixteen_pairs(orbifold):
    classes = orbifold.singular_set()
    assert len(classes) == 16
    assert all(len(c) == 2 for c in classes)
    assert len({c.key for cls in classes for c in cls}) == 32
    assert all(len({c.source for c in cls}) == 1 for cls in classes)


def test_singular_set_is_deterministic(orbifold):
    first = [[c.key for c in cls] for cls in orbifold.singular_set()]
    assert first == [[c.key for c in cls] for cls in Orbifold().singular_set()]


def test_class_of(orbifold):
    curve = orbifold.upstairs_curves()[0]
    assert any(c.key == curve.key for c in orbifold.class_of(curve))
    with raises(PreconditionError):
        orbifold.class_of(curve._replace(free_factor=1))


def test_actions_are_involutions(orbifold, rng):
    z = rng.uniform(0, 1, (20, 3)) + 1j * rng.uniform(0, 1, (20, 3))
    for g in orbifold.group:
        assert orbifold.is_involution(g, z)
    assert orbifold.group[0].is_identity
    assert orbifold.alpha.compose(orbifold.alpha).is_identity
    assert not orbifold.alpha_beta.is_identity


def test_min_pairwise_distance(orbifold):
    assert orbifold.min_pairwise_distance() == approx(0.25)


@mark.parametrize("point, generic", [
    ((0.1, 0.2, 0.3), True),
    ((0.375, 0.5, 0.25), True),
    ((0.25, 0.3, 0.3), True),
    ((0.25, 0.75, 0.1), False),
    ((0.75, 0.25, 0.6), False),
    ((0.5, 0.3, 0.0), False),
    ((0.0, 0.9, 0.5), False),
])
def test_genericity_examples(orbifold, point, generic):
    is_generic, met = orbifold.genericity(*point)
    assert is_generic == generic
    assert bool(met) != generic
    assert bool(orbifold.genericity_rule([point])[0]) == generic


@given(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9]),
       st.sampled_from([0.0, 0.25, 0.4, 0.75]),
       st.sampled_from([0.0, 0.2, 0.5]))
def test_genericity_rule_matches_distances(alpha_hat, beta_hat, gamma_hat):
    orb = Orbifold()
    is_generic, _ = orb.genericity(alpha_hat, beta_hat, gamma_hat)
    assert bool(orb.genericity_rule([[alpha_hat, beta_hat, gamma_hat]])[0]) == is_generic


def test_torus_fiber_is_imaginary_translate(orbifold):
    fiber = orbifold.torus_fiber(0.1, 0.2, 0.3)
    np.testing.assert_allclose(fiber.evaluate([0.5, 0.25, 0.0]), [0.1 + 0.5j, 0.2 + 0.25j, 0.3])
    assert fiber.box == util.ParameterBox((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


def test_torus_fiber_needs_pure_imaginary_periods():
    skew = (1j, 0.5 + 1j, 1j)
    with raises(ConfigError):
        Orbifold(skew).torus_fiber(0.1, 0.2, 0.3)
    assert Orbifold(skew, strict_periods=False).torus_fiber(0.1, 0.2, 0.3).domain_dim == 3


def test_cohomology_pullback_vanishes_on_fibers(orbifold):
    fiber = orbifold.torus_fiber(0.1, 0.2, 0.3)
    np.testing.assert_array_equal(cohomology_pullback(fiber, fiber.box.centroid), 0.0)


def test_cohomology_pullback_of_complex_line():
    line = geom.AffineImmersion(np.zeros(3, dtype=complex), [[1.0, 1j], [0, 0], [0, 0]])
    forms = cohomology_pullback(line, line.box.centroid)
    assert forms[0, 0, 1] == approx(1.0)
    assert forms[0, 1, 0] == approx(-1.0)
    assert not np.any(forms[1:])


@mark.parametrize("n", (2, 3, 4))
def test_blowup_chart_roundtrip(rng, n):
    chart = BlowupChart(n)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert util.root_of_unity_multiple(blowup_roundtrip(chart, z), z, n) is not None


def test_blowup_chart_errors():
    with raises(PreconditionError):
        BlowupChart(1)
    with raises(PreconditionError):
        BlowupChart(3, direction=3)
    chart = BlowupChart(3, direction=1)
    with raises(ChartBoundaryError):
        chart.to_chart([1.0, 0.0, 2.0])
    with raises(PreconditionError):
        chart.to_chart([1.0, 2.0])


@mark.parametrize("n", (2, 3, 4))
def test_volume_form_in_blowup_chart(n):
    assert volume_form_in_blowup_chart(n) == approx(1.0 / n, abs=1e-15)
    w = np.array([0.3] + [0.2 + 0.1j] * (n - 1))
    assert volume_form_in_blowup_chart_numeric(n, w) == approx(1.0 / n, abs=1e-8)
