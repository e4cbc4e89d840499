import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from pytest import mark, raises

from slaglab import util


def test_parameter_box_grid_is_midpoint():
    box = util.ParameterBox((0.0, -1.0), (1.0, 1.0))
    ts = box.grid(4)
    assert ts.shape == (16, 2)
    np.testing.assert_allclose(sorted(set(ts[:, 0])), [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(box.centroid, [0.5, 0.0])
    assert math.isclose(box.cell_volume(4) * 16, 2.0)


def test_parameter_box_rejects_empty_grid():
    with raises(ValueError):
        util.ParameterBox.cube(2).grid(0)


def test_phase_is_taken_mod_pi():
    assert util.Phase(0.3) == util.Phase(0.3 + math.pi)
    assert util.Phase(-math.pi / 2).is_congruent(math.pi / 2)
    assert math.isclose(util.Phase(0.1).distance(math.pi - 0.1), 0.2)
    with raises(TypeError):
        util.Phase(0.1) == 0.1


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_phase_fit_rotates_onto_real_axis(value):
    rotated = util.Phase.fit(value).unit * value
    assert abs(rotated.imag) <= 1e-12 * abs(value)


def test_phase_fit_of_zero():
    with raises(ValueError):
        util.Phase.fit(0)


def test_complex_hessian_of_hermitian_form(rng):
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = A + A.conj().T
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)

    def form(w):
        return float(np.real(np.conj(w) @ A @ w))

    np.testing.assert_allclose(util.complex_hessian(form, z, 1e-3), A.T, atol=1e-7)


@mark.parametrize("n", (2, 3, 4))
def test_root_of_unity_multiple(n):
    b = np.array([1.0 + 2.0j, -0.5j])
    assert util.root_of_unity_multiple(np.exp(2j * np.pi / n) * b, b, n) == 1
    assert util.root_of_unity_multiple(b, b, n) == 0
    assert util.root_of_unity_multiple(2 * b, b, n) is None


def test_relative_step_never_below_h():
    assert util.relative_step(np.array([0.1j]), 1e-4) == 1e-4
    assert util.relative_step(np.array([10.0]), 1e-4) == 1e-3


def test_timeout():
    t = util.Timeout()
    assert not t.is_timed_out
    assert t.remaining == math.inf
    assert util.Timeout(0.0).remaining == 0.0


def test_make_rng_is_reproducible():
    np.testing.assert_array_equal(util.make_rng(7).standard_normal(5),
                                  util.make_rng(7).standard_normal(5))
