import math

import numpy as np
from pytest import approx, fixture, mark, raises

from slaglab import geom, gluing, perturb, util
from slaglab.exceptions import CollarMismatchError, GuardedStepError, PreconditionError


@fixture
def flat():
    return geom.FlatPotential(3)


@fixture
def vol():
    return geom.HolomorphicVolumeForm.standard(3)


def _deformed(orbifold, point, modes=2, grid=8, amplitude=0.0):
    torus = perturb.DeformedTorus(orbifold.torus_fiber(*point), modes, grid=grid)
    if amplitude:
        C = np.zeros_like(torus.coefficients)
        C[0, 0, 1, 0] = amplitude
        torus = torus.with_coefficients(C)
    return torus


def _atlas(orbifold):
    return gluing.NeckAtlas(orbifold, gluing.NeckConfig(r0=0.1, r1=0.2, a=0.01))


def test_trig_basis():
    basis = perturb.TrigBasis(2, length=2.0)
    assert len(basis) == 5
    np.testing.assert_allclose(basis.values(0.0), [1, 1, 0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(basis.values(0.5), [1, 0, 1, -1, 0], atol=1e-15)
    s, h = np.array([0.1, 0.7, 1.3]), 1e-6
    np.testing.assert_allclose(basis.derivatives(s),
                               (basis.values(s + h) - basis.values(s - h)) / (2 * h),
                               atol=1e-8)
    np.testing.assert_array_equal(basis.frequencies, [0, 1, 1, 2, 2])
    with raises(PreconditionError):
        perturb.TrigBasis(-1)


def test_deformed_torus_preconditions(orbifold):
    skew = geom.AffineImmersion(np.zeros(3), np.eye(3))
    with raises(PreconditionError):
        perturb.DeformedTorus(skew)
    with raises(PreconditionError):
        perturb.DeformedTorus(orbifold.torus_fiber(0.1, 0.2, 0.3), 2, np.zeros((3, 3, 3, 3)))


def test_grid_deformation_matches_pointwise(orbifold, rng):
    torus = _deformed(orbifold, (0.1, 0.2, 0.3))
    torus = torus.with_coefficients(0.01 * rng.standard_normal(torus.coefficients.shape))
    xi, X = torus.grid_deformation()
    xi2, X2 = torus.deformation_many(torus.sample_grid())
    np.testing.assert_allclose(xi, xi2, atol=1e-15)
    np.testing.assert_allclose(X, X2, atol=1e-13)


def test_fibers_have_zero_energy(orbifold, flat, vol):
    for point in ((0.1, 0.2, 0.3), (0.375, 0.5, 0.25)):
        assert perturb.defect_energy(_deformed(orbifold, point), flat, vol) < 1e-30


def test_far_fiber_sees_flat_metric(orbifold, vol):
    energy = perturb.defect_energy(_deformed(orbifold, (0.375, 0.5, 0.25)), _atlas(orbifold), vol)
    assert energy < 1e-16


def test_guard(orbifold, flat, vol):
    torus = _deformed(orbifold, (0.1, 0.2, 0.3))
    C = np.zeros_like(torus.coefficients)
    C[0, 0, 0, 0] = 0.5
    with raises(GuardedStepError):
        perturb.defect_energy(torus.with_coefficients(C), flat, vol)
    assert torus.check_guard() == 0.0


def test_energy_matches_pointwise_pullbacks(orbifold, flat, vol):
    torus = _deformed(orbifold, (0.3, 0.4, 0.6), amplitude=0.01)
    energy = perturb.defect_energy(torus, flat, vol)
    unit = util.Phase(math.pi / 2).unit
    oracle = 0.0
    for t in torus.sample_grid():
        M = geom.pullback_two_form(flat, torus, t)
        v = geom.pullback_volume_form(vol, torus, t) * unit
        oracle += float(np.sum(M * M)) + v.imag ** 2
    assert energy > 0
    assert energy == approx(oracle * torus.weight, rel=1e-10)


def test_analytic_gradient(orbifold, flat, vol, rng):
    check = perturb.gradient_check(_deformed(orbifold, (0.3, 0.4, 0.6)), flat, vol,
                                   samples=3, rng=rng)
    assert check.mode == 'analytic'
    assert check.max_relative_error < 1e-5


def test_mixed_gradient_on_glued_metric(orbifold, vol, rng):
    torus = _deformed(orbifold, (0.1, 0.5, 0.1), modes=1, grid=6)
    check = perturb.gradient_check(torus, _atlas(orbifold), vol, samples=2, rng=rng)
    assert check.mode == 'mixed'
    assert check.max_relative_error < 1e-4


def test_minimize_flat(orbifold, flat, vol):
    start = _deformed(orbifold, (0.3, 0.4, 0.6), amplitude=0.01)
    result = perturb.minimize_defect(start, flat, vol)
    assert np.all(np.diff(result.history) < 0)
    assert result.history[0] / max(result.history[-1], np.finfo(float).tiny) >= 1e3
    assert perturb.fiber_distance(result.torus) < 1e-4
    assert not (result.converged and result.stalled)


def test_minimize_starting_at_a_fiber(orbifold, flat, vol):
    result = perturb.minimize_defect(_deformed(orbifold, (0.1, 0.2, 0.3)), flat, vol)
    assert result.converged
    assert result.iterations == 0
    assert result.message == "already below tolerance"


def test_minimize_glued_is_monotone(orbifold, vol):
    torus = _deformed(orbifold, (0.1, 0.5, 0.1), modes=1, grid=6)
    result = perturb.minimize_defect(torus, _atlas(orbifold), vol, max_iter=15)
    assert result.mode == 'mixed'
    assert result.history[0] > 0
    assert np.all(np.diff(result.history) < 0)


@fixture(scope='module')
def surgered(orbifold):
    return perturb.build_surgered_torus(0.3, 0.01, orbifold=orbifold)


def test_surgered_torus(surgered):
    torus, report = surgered
    assert len(torus.curves) == 4
    assert all(c.source == 'beta' for c in torus.curves)
    assert len(torus.pieces) == 8
    assert max(c['mismatch'] for c in report.collars) < 1e-10
    assert np.isfinite(report.energy)
    assert 0 <= report.collar_energy <= report.energy
    assert len(report.to_dict()['inner']) == 8


def test_surgery_pieces_reach_the_divisor(surgered):
    torus, report = surgered
    assert report.divisor['circle'] < 1e-12
    assert report.divisor['omega_raw_sup'] < 1e-10
    for piece in torus.pieces:
        assert piece.box.lower[0] == 0.0
        ts = piece.divisor_samples(9)
        zs = piece.evaluate_many(ts)
        i, j = piece.potential.slots
        np.testing.assert_array_equal(zs[:, i], 0.0)
        assert np.all(np.isfinite(piece.potential.hessian_many(zs)))


def test_surgery_pieces_are_special_lagrangian_inside_the_collar(surgered):
    torus, _ = surgered
    for piece in torus.pieces:
        lo, hi = piece.box.lower[1], piece.box.upper[1]
        ts = np.stack(np.meshgrid(np.linspace(0, torus.inner_radius ** 2, 4), np.linspace(lo, hi, 5),
                                  [0.0, 0.7], indexing='ij'), -1).reshape(-1, 3)
        H, zs, jac = geom.hermitian_pullback(piece.potential, piece, ts)
        assert np.max(np.abs(H.imag)) < 1e-12
        vol = torus.phase.unit * piece.volume_form.coefficient_many(zs) * np.linalg.det(jac)
        assert np.max(np.abs(vol.imag)) < 1e-12
        assert np.all(vol.real < 0)


def test_surgery_jacobian_matches_differences(surgered):
    torus, _ = surgered
    piece = torus.pieces[3]
    ts = np.array([[0.005, 0.9, 0.4], [0.02, 1.2, 0.1], [0.03, 2.0, 0.6]])
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (piece.evaluate_many(ts + e) - piece.evaluate_many(ts - e)) / (2 * h)
        np.testing.assert_allclose(piece.jacobian_many(ts)[:, :, k], fd, atol=1e-6)


def test_collar_check_catches_a_wrong_chart_map(orbifold, monkeypatch):
    torus = perturb.SurgeredTorus(orbifold, 0.3, 0.01)
    piece = torus.pieces[2]
    exact = piece.chart_map_many
    i, _ = piece.potential.slots

    def real_plane(ts):
        # L00 built from R^2 instead of iR^2
        out = exact(ts)
        out[:, i] *= -1
        return out

    monkeypatch.setattr(piece, 'chart_map_many', real_plane)
    with raises(CollarMismatchError) as info:
        torus.check_collars(1e-3)
    collars = info.value.collars
    assert len(collars) == 4
    bad = [c for c in collars if c['mismatch'] > 1e-3]
    assert len(bad) == 1
    assert bad[0]['curve'] == repr(torus.curves[piece.index])
    assert all(c['tolerance'] == 1e-3 for c in collars)


def test_surgered_torus_rejects_bad_input(orbifold):
    with raises(PreconditionError):
        perturb.build_surgered_torus(0.25, 0.01, orbifold=orbifold)
    with raises(PreconditionError):
        perturb.SurgeredTorus(orbifold, 0.3, 0.01, radii=(0.18, 0.12))
    with raises(PreconditionError):
        perturb.SurgeredTorus(orbifold, 0.3, 0.01, radii=(0.12, 0.3))
    with raises(PreconditionError):
        perturb.SurgeredTorus(orbifold, 0.3, 0.0)
    with raises(CollarMismatchError) as info:
        perturb.build_surgered_torus(0.3, 0.01, orbifold=orbifold, tol=-1.0)
    assert len(info.value.collars) == 4
