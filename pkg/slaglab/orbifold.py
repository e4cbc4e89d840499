# Copyright (c) 2026 The slaglab authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License in the file LICENSE.txt or at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

'''The flat orbifold (E₁×E₂×E₃)/(ℤ₂×ℤ₂) and its blowup charts.

Points of each elliptic curve E_j = ℂ/(ℤ + τ_jℤ) that matter combinatorially
(translations of the actions, fixed points) are kept as exact
:class:`LatticePoint` pairs (r, s) meaning r + sτ_j modulo 1.  Floating
point enters only through distances.

The two involutions are

    α(z₁, z₂, z₃) = (−z₁ + ½, −z₂ + ½, z₃)
    β(z₁, z₂, z₃) = (−z₁, z₂, −z₃)

and α∘β acts on E₁ by a half-period translation, so it has no fixed points.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['DEFAULT_TAU', 'INTERSECT_TOL',
           'LatticePoint', 'EllipticCurve', 'FactorMap', 'GroupAction', 'FixedCurve',
           'Orbifold', 'BlowupChart',
           'blowup_roundtrip', 'cohomology_pullback', 'default_orbifold',
           'volume_form_in_blowup_chart', 'volume_form_in_blowup_chart_numeric']


import collections
from fractions import Fraction
import functools
import itertools

import numpy as np
import sympy as sp

from . import logger
from .exceptions import ChartBoundaryError, ConfigError, DomainError, PreconditionError
from . import geom
from . import util


#: complex: Default period of every factor.
DEFAULT_TAU = 1j

#: float: Flat distance below which a torus fiber is said to meet a curve.
INTERSECT_TOL = 1e-9

_HALF = Fraction(1, 2)
_HALF_PERIODS = ((Fraction(0), Fraction(0)), (_HALF, Fraction(0)),
                 (Fraction(0), _HALF), (_HALF, _HALF))


class LatticePoint(collections.namedtuple('LatticePoint', 'r s')):
    '''The point r + sτ of an elliptic curve, reduced to [0, 1)².'''
    __slots__ = ()

    def __new__(cls, r=0, s=0):
        return super().__new__(cls, Fraction(r) % 1, Fraction(s) % 1)

    def __repr__(self):
        return "<%s %s + %s tau>" % (self.__class__.__name__, self.r, self.s)

    def __add__(self, other):
        if not isinstance(other, LatticePoint):
            raise TypeError("Unsupported type for + expected LatticePoint")
        return LatticePoint(self.r + other.r, self.s + other.s)

    def __neg__(self):
        return LatticePoint(-self.r, -self.s)

    def scaled(self, sign):
        return self if sign > 0 else -self

    @property
    def is_zero(self):
        '''bool: True for the lattice itself.'''
        return self.r == 0 and self.s == 0

    def halves(self):
        '''The four solutions x of 2x ≡ self.'''
        return [LatticePoint(self.r / 2 + dr, self.s / 2 + ds) for dr, ds in _HALF_PERIODS]

    def to_complex(self, tau):
        return complex(float(self.r) + float(self.s) * tau)


class EllipticCurve:
    '''The curve ℂ/(ℤ + τℤ) with Im τ > 0.

    Args:
        tau (complex): the second period.
    '''

    __slots__ = ('_tau')

    def __init__(self, tau=DEFAULT_TAU):
        tau = complex(tau)
        if not tau.imag > 0:
            raise DomainError("period tau must have positive imaginary part, got %r" % tau)
        self._tau = tau

    def __repr__(self):
        return "<%s tau=%s%s>" % (self.__class__.__name__, self._tau,
                                  "" if self.pure_imaginary else " (not pure imaginary)")

    @property
    def tau(self):
        '''complex: The period τ.'''
        return self._tau

    @property
    def pure_imaginary(self):
        '''bool: True if Re τ = 0.'''
        return self._tau.real == 0

    def lattice_coords(self, z):
        '''Real (r, s) with z = r + sτ.'''
        z = np.asarray(z, dtype=complex)
        s = z.imag / self._tau.imag
        r = z.real - s * self._tau.real
        return r, s

    def reduce(self, z):
        '''Representative in the fundamental parallelogram [0,1)×[0,1)τ.'''
        r, s = self.lattice_coords(z)
        return (r - np.floor(r)) + (s - np.floor(s)) * self._tau

    def nearest_representative(self, z):
        '''The translate z − λ (λ in the lattice) of smallest modulus.'''
        z = np.asarray(z, dtype=complex)
        r, s = self.lattice_coords(z)
        base = z - (np.round(r) + np.round(s) * self._tau)
        best = base
        for m, n in itertools.product((-1, 0, 1), repeat=2):
            cand = base - (m + n * self._tau)
            best = np.where(np.abs(cand) < np.abs(best), cand, best)
        return best

    def distance(self, z, w):
        '''Flat distance between two points of the curve.'''
        return np.abs(self.nearest_representative(np.asarray(z) - np.asarray(w)))

    def real_distance(self, x, y):
        '''Distance between vertical lines Re z = x and Re z = y (τ pure imaginary).'''
        d = np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), 1.0)
        return np.minimum(d, 1.0 - d)


class FactorMap(collections.namedtuple('FactorMap', 'sign shift')):
    '''z ↦ sign·z + shift on one elliptic curve; shift is a :class:`LatticePoint`.'''
    __slots__ = ()

    def __new__(cls, sign, shift=LatticePoint()):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return super().__new__(cls, sign, shift)

    def apply_exact(self, p):
        return p.scaled(self.sign) + self.shift

    def compose(self, inner):
        '''self ∘ inner.'''
        return FactorMap(self.sign * inner.sign, inner.shift.scaled(self.sign) + self.shift)

    def fixed_points(self):
        '''Fixed points on the curve: None for the whole curve, else a list.'''
        if self.sign == 1:
            return None if self.shift.is_zero else []
        return self.shift.halves()


class GroupAction(collections.namedtuple('GroupAction', 'name factors')):
    '''An affine map of E₁×E₂×E₃ given factorwise.'''
    __slots__ = ()

    def __repr__(self):
        parts = ["%sz%d%+g%+gtau" % ('' if f.sign > 0 else '-', j + 1, f.shift.r, f.shift.s)
                 for j, f in enumerate(self.factors)]
        return "<%s %s: (%s)>" % (self.__class__.__name__, self.name, ', '.join(parts))

    def compose(self, inner, name=None):
        '''self ∘ inner.'''
        return GroupAction(name or "%s*%s" % (self.name, inner.name),
                           tuple(f.compose(g) for f, g in zip(self.factors, inner.factors)))

    @property
    def is_identity(self):
        '''bool: True if every factor is the identity.'''
        return all(f.sign == 1 and f.shift.is_zero for f in self.factors)

    def apply_exact(self, points):
        '''Maps a tuple of three LatticePoints (or None for a free factor).'''
        return tuple(None if p is None else f.apply_exact(p) for f, p in zip(self.factors, points))

    def apply(self, z, curves):
        '''Numeric action on points of shape (..., 3), reduced modulo the lattices.'''
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        for j, (f, curve) in enumerate(zip(self.factors, curves)):
            out[..., j] = curve.reduce(f.sign * z[..., j] + f.shift.to_complex(curve.tau))
        return out

    def apply_to_curve(self, curve):
        return FixedCurve(curve.free_factor, self.apply_exact(curve.points), curve.source)


class FixedCurve(collections.namedtuple('FixedCurve', 'free_factor points source')):
    '''A fixed elliptic curve {p_i} × {p_j} × E_free.

    ``points`` holds a :class:`LatticePoint` for each fixed factor and None
    for the free one; ``source`` names the action that fixes it.  Curves
    compare by :attr:`key`, not by ``source``.
    '''
    __slots__ = ()

    @property
    def key(self):
        '''tuple: Hashable identity (free factor and fixed points).'''
        return (self.free_factor, self.points)

    @property
    def fixed_factors(self):
        '''tuple of int: Indices of the two fixed factors.'''
        return tuple(j for j in range(3) if j != self.free_factor)

    def center(self, curves):
        '''Complex coordinates of the fixed factors (nan on the free factor).'''
        return np.array([np.nan if p is None else p.to_complex(c.tau)
                         for p, c in zip(self.points, curves)], dtype=complex)

    def __repr__(self):
        coords = ["E%d" % (j + 1) if p is None else "%s%+stau" % (p.r, p.s)
                  for j, p in enumerate(self.points)]
        return "<%s %s (%s)>" % (self.__class__.__name__, self.source, ' x '.join(coords))


class Orbifold:
    '''The configured orbifold M₀ with its actions and singular curves.

    Args:
        taus (tuple of complex): periods τ₁, τ₂, τ₃.
        strict_periods (bool): refuse torus fibers unless every τ is pure imaginary.
        intersect_tol (float): distance threshold of "torus meets curve".
    '''

    def __init__(self, taus=(DEFAULT_TAU,) * 3, strict_periods=True, intersect_tol=INTERSECT_TOL):
        self.curves = tuple(EllipticCurve(t) for t in taus)
        self.strict_periods = strict_periods
        self.intersect_tol = intersect_tol
        half = LatticePoint(_HALF, 0)
        zero = LatticePoint()
        self.alpha = GroupAction('alpha', (FactorMap(-1, half), FactorMap(-1, half), FactorMap(1, zero)))
        self.beta = GroupAction('beta', (FactorMap(-1, zero), FactorMap(1, zero), FactorMap(-1, zero)))
        self.alpha_beta = self.alpha.compose(self.beta, 'alpha*beta')
        self.group = (GroupAction('id', (FactorMap(1),) * 3), self.alpha, self.beta, self.alpha_beta)
        for c in self.curves:
            if not c.pure_imaginary:
                logger.warning("%r: torus fibers need pure imaginary periods", c)

    def __repr__(self):
        return "<%s taus=%s>" % (self.__class__.__name__, [c.tau for c in self.curves])

    @property
    def pure_imaginary(self):
        '''bool: True if all three periods are pure imaginary.'''
        return all(c.pure_imaginary for c in self.curves)

    def fixed_locus(self, action):
        '''Fixed curves of one of the actions.

        Each factor of the action contributes either no constraint (identity
        map, free factor), no solutions (a pure translation) or four points.
        '''
        per_factor = [f.fixed_points() for f in action.factors]
        if any(p == [] for p in per_factor):
            return []
        free = [j for j, p in enumerate(per_factor) if p is None]
        if len(free) != 1:
            raise PreconditionError("%r does not fix a family of curves" % (action,))
        options = [[None] if p is None else p for p in per_factor]
        return [FixedCurve(free[0], pts, action.name) for pts in itertools.product(*options)]

    def upstairs_curves(self):
        '''The 32 fixed curves of α and β in E₁×E₂×E₃.'''
        return self.fixed_locus(self.alpha) + self.fixed_locus(self.beta)

    def singular_set(self):
        '''Representatives of the 16 singular curves of M₀.

        Curves are grouped into orbits of the ℤ₂×ℤ₂ action; returns a list of
        classes, each a list of upstairs curves sorted deterministically.
        '''
        upstairs = self.upstairs_curves()
        index = {c.key: i for i, c in enumerate(upstairs)}
        parent = list(range(len(upstairs)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, c in enumerate(upstairs):
            for g in self.group:
                j = index.get(g.apply_to_curve(c).key)
                if j is None:
                    raise PreconditionError("%r maps %r off the fixed locus" % (g, c))
                parent[find(i)] = find(j)
        classes = collections.defaultdict(list)
        for i, c in enumerate(upstairs):
            classes[find(i)].append(c)
        return [classes[k] for k in sorted(classes)]

    def curve_distance(self, first, second):
        '''Flat distance between two fixed curves.'''
        def factor_distance(j):
            a, b = first.points[j], second.points[j]
            return float(self.curves[j].distance(a.to_complex(self.curves[j].tau),
                                                 b.to_complex(self.curves[j].tau)))
        if first.free_factor == second.free_factor:
            return float(np.sqrt(sum(factor_distance(j) ** 2 for j in first.fixed_factors)))
        shared = set(first.fixed_factors) & set(second.fixed_factors)
        return float(np.sqrt(sum(factor_distance(j) ** 2 for j in shared)))

    def min_pairwise_distance(self):
        curves = self.upstairs_curves()
        return min(self.curve_distance(a, b) for a, b in itertools.combinations(curves, 2))

    def torus_fiber(self, alpha_hat, beta_hat, gamma_hat, points_per_axis=6):
        '''The fiber (s₁,s₂,s₃) ↦ (α̂ + is₁, β̂ + is₂, γ̂ + is₃), s_j ∈ [0, Im τ_j).

        Raises:
            :class:`slaglab.exceptions.ConfigError` for non-pure-imaginary
            periods in strict mode.
        '''
        if not self.pure_imaginary:
            if self.strict_periods:
                raise ConfigError("torus fibers need pure imaginary periods, got %s"
                                  % [c.tau for c in self.curves])
            logger.warning("building a torus fiber with non-pure-imaginary periods")
        box = util.ParameterBox((0.0, 0.0, 0.0), tuple(c.tau.imag for c in self.curves))
        return geom.AffineImmersion(np.array([alpha_hat, beta_hat, gamma_hat], dtype=complex),
                                    1j * np.eye(3), box, points_per_axis,
                                    label="T(%g,%g,%g)" % (alpha_hat, beta_hat, gamma_hat))

    def fiber_distances(self, real_parts):
        '''Distances from fibers to every upstairs curve.

        Args:
            real_parts: array (m, 3) of (α̂, β̂, γ̂).

        Returns:
            numpy.ndarray of shape (m, 32), ordered like :meth:`upstairs_curves`.
        '''
        real_parts = np.atleast_2d(np.asarray(real_parts, dtype=float))
        out = []
        for c in self.upstairs_curves():
            sq = np.zeros(real_parts.shape[0])
            for j in c.fixed_factors:
                d = self.curves[j].real_distance(real_parts[:, j], float(c.points[j].r))
                sq += d * d
            out.append(np.sqrt(sq))
        return np.stack(out, axis=-1)

    def genericity(self, alpha_hat, beta_hat, gamma_hat):
        '''(is_generic, intersected upstairs curves) by the distance test.'''
        dist = self.fiber_distances([[alpha_hat, beta_hat, gamma_hat]])[0]
        curves = self.upstairs_curves()
        met = [c for c, d in zip(curves, dist) if d < self.intersect_tol]
        return (not met), met

    def genericity_rule(self, real_parts):
        '''Closed-form rule: non-generic iff (α̂,β̂) ∈ {¼,¾}² or (α̂,γ̂) ∈ {0,½}² mod 1.'''
        x = np.atleast_2d(np.asarray(real_parts, dtype=float))

        def near(v, targets):
            d = np.mod(v[:, None] - np.asarray(targets)[None, :], 1.0)
            return np.any(np.minimum(d, 1.0 - d) < self.intersect_tol, axis=1)

        quarter = near(x[:, 0], [0.25, 0.75]) & near(x[:, 1], [0.25, 0.75])
        half = near(x[:, 0], [0.0, 0.5]) & near(x[:, 2], [0.0, 0.5])
        return ~(quarter | half)

    def is_involution(self, action, z, tol=1e-12):
        '''bool: action∘action moves none of the points of z by more than tol.'''
        back = action.apply(action.apply(z, self.curves), self.curves)
        d = np.stack([c.distance(back[..., j], z[..., j]) for j, c in enumerate(self.curves)], -1)
        return bool(np.max(d) < tol)

    def class_of(self, curve):
        for cls in self.singular_set():
            if any(c.key == curve.key for c in cls):
                return cls
        raise PreconditionError("%r is not an upstairs fixed curve" % (curve,))


def default_orbifold():
    return Orbifold()


def cohomology_pullback(immersion, t):
    '''Pullbacks of dx_j∧dy_j (j = 1, 2, 3) to an immersion at t.

    Returns:
        numpy.ndarray of shape (3, k, k).
    '''
    J = immersion.jacobian(t)
    X, Y = J.real, J.imag
    return np.einsum('ja,jb->jab', X, Y) - np.einsum('jb,ja->jab', X, Y)


class BlowupChart:
    '''Chart of the blowup of ℂⁿ/ℤ_n along the coordinate direction ``direction``.

    w_d = z_d^n and w_i = z_i/z_d (i ≠ d); the inverse uses the principal
    n-th root, so a round trip returns z up to an n-th root of unity.
    '''

    def __init__(self, n, direction=0):
        if int(n) < 2:
            raise PreconditionError("blowup chart needs n >= 2")
        if not 0 <= direction < n:
            raise PreconditionError("direction must be in [0, %d)" % n)
        self.n = int(n)
        self.direction = int(direction)

    def __repr__(self):
        return "<%s n=%d direction=%d>" % (self.__class__.__name__, self.n, self.direction)

    def to_chart(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise PreconditionError("expected %d coordinates" % self.n)
        zd = z[..., self.direction]
        if np.any(zd == 0):
            raise ChartBoundaryError("z_%d = 0 lies outside blowup chart %d"
                                     % (self.direction + 1, self.direction + 1))
        w = z / zd[..., None]
        w[..., self.direction] = zd ** self.n
        return w

    def from_chart(self, w):
        w = np.asarray(w, dtype=complex)
        zd = w[..., self.direction] ** (1.0 / self.n)
        z = w * zd[..., None]
        z[..., self.direction] = zd
        return z


def blowup_roundtrip(chart, z):
    '''from_chart(to_chart(z)); equals z up to an n-th root of unity.'''
    return chart.from_chart(chart.to_chart(z))


@functools.lru_cache(maxsize=None)
def _symbolic_volume_coefficient(n):
    w = sp.symbols('w1:%d' % (n + 1))
    w1 = sp.Symbol('w1', positive=True)
    w = (w1,) + w[1:]
    root = w1 ** sp.Rational(1, n)
    z = [root] + [root * wi for wi in w[1:]]
    jac = sp.Matrix([[sp.diff(zi, wk) for wk in w] for zi in z])
    det = sp.simplify(sp.powsimp(jac.det(), force=True))
    if det.free_symbols:
        raise PreconditionError("chart volume coefficient %s is not constant" % det)
    return det.subs(w1, 0)


def volume_form_in_blowup_chart(n):
    '''Coefficient of π*(dz₁∧…∧dz_n) against dw₁∧…∧dw_n, computed with sympy.

    The chain rule at w₁ > 0 collapses to a constant, which is then the
    value on the divisor w₁ = 0 as well.  Equals 1/n.
    '''
    if int(n) < 2:
        raise PreconditionError("blowup chart needs n >= 2")
    return complex(_symbolic_volume_coefficient(int(n)))


def volume_form_in_blowup_chart_numeric(n, w, rel_step=1e-5):
    '''Finite-difference determinant of ∂z/∂w at a chart point w.

    Complex derivatives are taken along the real axis of each w_k with a
    step relative to |w_k|, so points very close to the divisor are fine.
    '''
    chart = BlowupChart(n)
    w = np.asarray(w, dtype=complex)
    jac = np.empty((n, n), dtype=complex)
    for k in range(n):
        h = rel_step * (abs(w[k]) if k == 0 else max(1.0, abs(w[k])))
        e = np.zeros(n, dtype=complex)
        e[k] = h
        jac[:, k] = (chart.from_chart(w + e) - chart.from_chart(w - e)) / (2 * h)
    return complex(np.linalg.det(jac))
