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

'''Approximate Ricci-flat metrics from glued potentials.

Around a singular curve, in normal coordinates (w₁, w₂) and a coordinate w₃
along the curve, the glued potential is

    h = χ(√U)·(U + |w₃|²) + (1 − χ(√U))·(f_a(U) + |w₃|²),   U = |w₁|² + |w₂|²,

with χ ≡ 0 for √U ≤ r₀ and χ ≡ 1 for √U ≥ r₁.  Writing h = H(U) + |w₃|²
with H = f_a + χ·(U − f_a), the derivatives H′, H″ follow from the chain
rule in r = √U, so the glued metric needs no finite differences.

:class:`NeckAtlas` places one such neck around every fixed curve of
E₁×E₂×E₃ and is the ambient metric of the perturbation experiments.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['CUTOFF_ORDERS',
           'NeckConfig', 'BlowupChartPotential', 'GluedPotential', 'NeckAtlas', 'PositivityReport',
           'RicciScan', 'ScalingReport',
           'cutoff', 'glued_metric_positivity', 'neck_discrepancy',
           'ricci_defect_scan', 'scaling_probe']


import collections
from typing import List, Optional

import numpy as np
import pydantic

from . import logger
from .exceptions import (ConfigError, DomainError, GuardedStepError,
                         InsufficientDataError, PreconditionError)
from . import canonical
from . import geom


#: tuple of int: Supported polynomial cutoff degrees (5 is C², 7 is C³).
CUTOFF_ORDERS = (5, 7)

_DIRECTIONS = np.array([[1.0, 0.0],
                        [np.sqrt(0.5), 1j * np.sqrt(0.5)],
                        [0.6, -0.8j],
                        [0.48 + 0.36j, 0.8]], dtype=complex)


class NeckConfig(pydantic.BaseModel):
    '''Radii and resolution parameters of the necks.

    ``r0``/``r1`` are normal distances √U; ``a`` is in units of U.  ``a_vector``
    optionally gives one value per singular class (16 entries) and
    ``a_list`` is the sequence used by scans and scaling probes.
    '''
    model_config = pydantic.ConfigDict(frozen=True, extra='forbid')

    r0: float = 0.5
    r1: float = 1.0
    a: float = 0.01
    a_vector: Optional[List[float]] = None
    a_list: List[float] = [0.1, 0.05, 0.025, 0.0125]
    cutoff_order: int = 5

    @pydantic.field_validator('r0', 'r1')
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("radii must be positive")
        return v

    @pydantic.field_validator('a')
    @classmethod
    def _non_negative(cls, v):
        if not v >= 0:
            raise ValueError("a must be non-negative")
        return v

    @pydantic.field_validator('a_vector')
    @classmethod
    def _sixteen(cls, v):
        if v is not None and (len(v) != 16 or any(not x > 0 for x in v)):
            raise ValueError("a_vector needs 16 positive entries")
        return v

    @pydantic.field_validator('a_list')
    @classmethod
    def _non_empty(cls, v):
        if not v or any(not x > 0 for x in v):
            raise ValueError("a_list needs positive entries")
        return v

    @pydantic.field_validator('cutoff_order')
    @classmethod
    def _order(cls, v):
        if v not in CUTOFF_ORDERS:
            raise ValueError("cutoff_order must be one of %s" % (CUTOFF_ORDERS,))
        return v

    @pydantic.model_validator(mode='after')
    def _ordered(self):
        if not self.r0 < self.r1:
            raise ValueError("neck radii need r0 < r1")
        for a in [self.a] + list(self.a_vector or []):
            if a > self.r0 / 4:
                logger.warning("a=%g exceeds r0/4=%g; the neck may not be small", a, self.r0 / 4)
        return self

    def a_for(self, k):
        '''Resolution parameter of singular class k.'''
        return self.a if self.a_vector is None else self.a_vector[k]


def _smoothstep(x, order):
    # polynomial and its first two x-derivatives
    if order == 5:
        p = x ** 3 * (10 - 15 * x + 6 * x * x)
        d1 = 30 * x * x * (1 - x) ** 2
        d2 = 60 * x * (1 - x) * (1 - 2 * x)
    else:
        p = x ** 4 * (35 - 84 * x + 70 * x * x - 20 * x ** 3)
        d1 = 140 * x ** 3 * (1 - x) ** 3
        d2 = 420 * x * x * (1 - x) ** 2 * (1 - 2 * x)
    return p, d1, d2


def cutoff(r, r0, r1, order=5, derivatives=False):
    '''Monotone polynomial transition from 0 at r₀ to 1 at r₁.

    χ′ and χ″ vanish at both ends.  With ``derivatives`` returns
    (χ, dχ/dr, d²χ/dr²).

    Raises:
        :class:`slaglab.exceptions.ConfigError` if r₀ ≥ r₁.
    '''
    if not r0 < r1:
        raise ConfigError("cutoff needs r0 < r1, got %r >= %r" % (r0, r1))
    if order not in CUTOFF_ORDERS:
        raise ConfigError("unsupported cutoff order %r" % (order,))
    r = np.asarray(r, dtype=float)
    width = r1 - r0
    x = np.clip((r - r0) / width, 0.0, 1.0)
    p, d1, d2 = _smoothstep(x, order)
    if not derivatives:
        return p
    return p, d1 / width, d2 / (width * width)


class GluedPotential(geom.RadialPotential):
    '''H(U) + |w₃|² on an annular chart around one singular curve.

    Args:
        a (float): resolution parameter of this neck.
        r0, r1 (float): inner and outer neck radius in √U.
        order (int): cutoff degree.
        flat_dim (int): number of coordinates along the curve (1 by default).
    '''

    def __init__(self, a, r0, r1, order=5, flat_dim=1):
        if not r0 < r1:
            raise ConfigError("neck needs r0 < r1")
        self.a = float(a)
        self.r0 = float(r0)
        self.r1 = float(r1)
        self.order = order
        super().__init__(2, flat_dim, label="glued(a=%g, %g..%g)" % (a, r0, r1))

    def profile(self, U):
        U = np.asarray(U, dtype=float)
        if np.any(~(U > 0)):
            raise DomainError("glued potential needs U > 0")
        r = np.sqrt(U)
        inner = r <= self.r0
        outer = r >= self.r1
        mid = ~(inner | outer)
        H, H1, H2 = U.copy(), np.ones_like(U), np.zeros_like(U)
        if np.any(inner):
            H[inner], H1[inner], H2[inner] = canonical.eh_value(U[inner], self.a)
        if np.any(mid):
            Um, rm = U[mid], r[mid]
            f, f1, f2 = canonical.eh_value(Um, self.a)
            D = -canonical.eh_discrepancy(Um, self.a)
            D1, D2 = 1.0 - f1, -f2
            chi, chi_r, chi_rr = cutoff(rm, self.r0, self.r1, self.order, derivatives=True)
            chi_u = chi_r / (2 * rm)
            chi_uu = chi_rr / (4 * Um) - chi_r / (4 * Um * rm)
            H[mid] = f + chi * D
            H1[mid] = f1 + chi_u * D + chi * D1
            H2[mid] = f2 + chi_uu * D + 2 * chi_u * D1 + chi * D2
        return H, H1, H2

    def region(self, U):
        ''''eh', 'annulus' or 'flat' for a scalar U.'''
        r = np.sqrt(U)
        if r <= self.r0:
            return 'eh'
        if r >= self.r1:
            return 'flat'
        return 'annulus'


class BlowupChartPotential(geom.KahlerPotential):
    '''A glued neck metric written in a blowup chart of ℂ²/ℤ₂, times a flat factor.

    Coordinates are (c₀, w, c₁): (c₀, c₁) is a point of
    ``orbifold.BlowupChart(2, direction)``, so p = w_d² sits in slot d and
    q = w_{1−d}/w_d in the other, and w runs along the curve.  With
    U = |p|(1 + |q|²) the metric is the pullback of the radial metric of
    ``potential``.  Inside r₀ it is written through S = √(U² + a²):

        g_pp̄ = A²/4S,  g_pq̄ = q p̄ A/2S,  g_qq̄ = S/A − a²|q|²/(A²S),   A = 1 + |q|²,

    which is smooth across the exceptional divisor p = 0 and has
    det = 1/4 there and wherever the profile is Ricci-flat.

    Args:
        potential (GluedPotential): radial neck potential in the normal coordinates.
        direction (int): 0 or 1, the chart of the blowup.
    '''

    has_exact_hessian = True

    def __init__(self, potential, direction=0):
        if direction not in (0, 1):
            raise PreconditionError("blowup chart direction must be 0 or 1")
        super().__init__(geom.ComplexChart(3, "blowup chart %d of C^2/Z2 x E" % (direction + 1)))
        self.potential = potential
        self.direction = direction
        self.slots = (0, 2) if direction == 0 else (2, 0)

    def __repr__(self):
        return "<%s %r direction=%d>" % (self.__class__.__name__, self.potential, self.direction)

    def _pq(self, zs):
        return zs[..., self.slots[0]], zs[..., self.slots[1]]

    def radial_u(self, z):
        p, q = self._pq(np.asarray(z, dtype=complex))
        return np.abs(p) * (1.0 + np.abs(q) ** 2)

    def is_admissible(self, z):
        p, _ = self._pq(np.asarray(z, dtype=complex))
        return bool(np.all(p != 0))

    def value(self, z):
        z = self.check_admissible(z)
        H, _, _ = self.potential.profile(self.radial_u(z))
        return float(H) + float(abs(z[1]) ** 2)

    def gradient(self, z):
        z = self.check_admissible(z)
        p, q = self._pq(z)
        U = self.radial_u(z)
        _, H1, _ = self.potential.profile(U)
        grad = np.empty(3, dtype=complex)
        grad[self.slots[0]] = H1 * (1.0 + abs(q) ** 2) * np.conj(p) / (2 * abs(p))
        grad[self.slots[1]] = H1 * abs(p) * np.conj(q)
        grad[1] = np.conj(z[1])
        return grad

    def hessian(self, z):
        return self.hessian_many(np.asarray(z, dtype=complex)[None, :])[0]

    def hessian_many(self, zs):
        zs = self.chart.check_point(zs)
        shape = zs.shape[:-1]
        flat = zs.reshape(-1, 3)
        p, q = self._pq(flat)
        A = 1.0 + np.abs(q) ** 2
        ap = np.abs(p)
        U = ap * A
        a = self.potential.a
        core = U <= self.potential.r0 ** 2
        if np.any(core & (U == 0)) and a == 0:
            raise DomainError("the flat cone metric is singular on the divisor p = 0")
        G = np.zeros((flat.shape[0], 2, 2), dtype=complex)
        if np.any(core):
            Ac, qc, pc = A[core], q[core], p[core]
            S = np.sqrt(U[core] ** 2 + a * a)
            G[core, 0, 0] = Ac * Ac / (4 * S)
            G[core, 0, 1] = qc * np.conj(pc) * Ac / (2 * S)
            G[core, 1, 1] = S / Ac - a * a * np.abs(qc) ** 2 / (Ac * Ac * S)
        rest = ~core
        if np.any(rest):
            Ar, qr, pr, apr, Ur = A[rest], q[rest], p[rest], ap[rest], U[rest]
            _, H1, H2 = self.potential.profile(Ur)
            G[rest, 0, 0] = H1 * Ar / (4 * apr) + H2 * Ar * Ar / 4
            G[rest, 0, 1] = qr * np.conj(pr) / (2 * apr) * (H1 + H2 * Ur)
            G[rest, 1, 1] = H1 * apr + H2 * apr * apr * np.abs(qr) ** 2
        G[:, 1, 0] = np.conj(G[:, 0, 1])
        g = np.zeros((flat.shape[0], 3, 3), dtype=complex)
        i, j = self.slots
        g[:, i, i] = G[:, 0, 0]
        g[:, i, j] = G[:, 0, 1]
        g[:, j, i] = G[:, 1, 0]
        g[:, j, j] = G[:, 1, 1]
        g[:, 1, 1] = 1.0
        return g.reshape(shape + (3, 3))


class PositivityReport(collections.namedtuple('PositivityReport',
                                              'positive min_eigenvalue radius samples')):
    '''Smallest glued-metric eigenvalue over a neck scan, and where it occurs.'''
    __slots__ = ()


def _neck_points(radii, w3=0.0):
    radii = np.asarray(radii, dtype=float)
    pts = radii[:, None, None] * _DIRECTIONS[None, :, :]
    pts = pts.reshape(-1, 2)
    return np.concatenate([pts, np.full((pts.shape[0], 1), w3, dtype=complex)], axis=1)


def glued_metric_positivity(config, a=None, radii=None):
    '''Minimum eigenvalue of the glued metric on the neck; reported, never raised.

    Samples radii from r₀/2 to 1.5·r₁ along a fixed set of complex directions.
    '''
    a = config.a if a is None else a
    pot = GluedPotential(a, config.r0, config.r1, config.cutoff_order)
    if radii is None:
        radii = np.linspace(0.5 * config.r0, 1.5 * config.r1, 161)
    pts = _neck_points(radii)
    eig = np.linalg.eigvalsh(pot.hessian_many(pts))[:, 0]
    worst = int(np.argmin(eig))
    return PositivityReport(bool(eig[worst] > 0), float(eig[worst]),
                            float(np.sqrt(pot.radial_u(pts[worst]))), int(pts.shape[0]))


class RicciScan(collections.namedtuple('RicciScan', 'a radii sup mean annulus_sup outside_sup')):
    '''Frobenius norm of the finite-difference Ricci form along the neck.

    ``sup``/``mean`` are per radius over the sampled directions;
    ``outside_sup`` covers radii more than a stencil margin away from the annulus.
    '''
    __slots__ = ()

    def rows(self):
        return [{'a': self.a, 'r': float(r), 'sup_defect': float(s), 'mean_defect': float(m)}
                for r, s, m in zip(self.radii, self.sup, self.mean)]


def ricci_defect_scan(config, a=None, radii=None, h=1e-3, directions=3):
    '''Ricci defect of the glued metric as a function of the neck radius.

    Raises:
        :class:`slaglab.exceptions.PreconditionError` if a radius is below r₀/2.
    '''
    a = config.a if a is None else a
    pot = GluedPotential(a, config.r0, config.r1, config.cutoff_order)
    if radii is None:
        radii = np.linspace(0.5 * config.r0, 1.5 * config.r1, 25)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0.5 * config.r0):
        raise PreconditionError("Ricci scan must stay outside r0/2, where the metric is exactly EH")
    sup, mean = [], []
    for r in radii:
        norms = [np.linalg.norm(geom.ricci_form(pot, z, h))
                 for z in _neck_points([r])[:directions]]
        sup.append(max(norms))
        mean.append(float(np.mean(norms)))
    sup, mean = np.array(sup), np.array(mean)
    margin = 2.0 * h * max(1.0, float(radii.max()))
    inside = (radii > config.r0 - margin) & (radii < config.r1 + margin)
    return RicciScan(float(a), radii, sup, mean,
                     float(sup[inside].max()) if inside.any() else 0.0,
                     float(sup[~inside].max()) if (~inside).any() else 0.0)


def neck_discrepancy(a, config, points=200):
    '''sup |f_a(U) − U| over the neck r₀² ≤ U ≤ r₁².'''
    U = np.linspace(config.r0 ** 2, config.r1 ** 2, points)
    return float(np.max(np.abs(canonical.eh_discrepancy(U, a))))


class ScalingReport(collections.namedtuple(
        'ScalingReport', 'a_values potential_sups potential_exponent ricci_sups ricci_exponent')):
    '''Fitted log-log slopes of the neck discrepancy and of the Ricci defect.'''
    __slots__ = ()


def _slope(a, values):
    return float(np.polyfit(np.log(a), np.log(values), 1)[0])


def scaling_probe(a_values, config, ricci=True, h=1e-3):
    '''Least-squares exponents of the O(a²) neck quantities.

    Raises:
        :class:`slaglab.exceptions.InsufficientDataError` for fewer than 3 values.
    '''
    a = np.asarray(a_values, dtype=float)
    if a.size < 3:
        raise InsufficientDataError("scaling probe needs at least 3 values of a, got %d" % a.size)
    ratios = a[1:] / a[:-1]
    if np.max(np.abs(ratios - 0.5)) > 1e-9:
        logger.warning("a-sequence %s is not geometric with ratio 1/2", list(a))
    pot = np.array([neck_discrepancy(x, config) for x in a])
    ric, ric_exp = None, None
    if ricci:
        radii = np.linspace(config.r0, config.r1, 9)[1:-1]
        ric = np.array([ricci_defect_scan(config, x, radii, h).annulus_sup for x in a])
        ric_exp = _slope(a, ric)
    return ScalingReport(a.tolist(), pot.tolist(), _slope(a, pot),
                         None if ric is None else ric.tolist(), ric_exp)


class NeckAtlas:
    '''Glued metric of E₁×E₂×E₃ with a neck around every fixed curve.

    Each point is assigned to its nearest fixed curve; within r₁ of it the
    metric is the glued radial metric in the curve's normal coordinates,
    elsewhere it is flat.  Points within r₁ of two curves raise
    :class:`slaglab.exceptions.GuardedStepError`.

    Args:
        orbifold (slaglab.orbifold.Orbifold): curves and periods.
        config (NeckConfig): radii and resolution parameters.
    '''

    is_flat = False

    def __init__(self, orbifold, config):
        self.orbifold = orbifold
        self.config = config
        self.curves = orbifold.upstairs_curves()
        classes = orbifold.singular_set()
        class_index = {c.key: k for k, cls in enumerate(classes) for c in cls}
        self.potentials = [GluedPotential(config.a_for(class_index[c.key]), config.r0, config.r1,
                                          config.cutoff_order, flat_dim=0)
                           for c in self.curves]
        self.centers = np.stack([c.center(orbifold.curves) for c in self.curves])
        self.chart = geom.ComplexChart(3, "E1 x E2 x E3")
        separation = orbifold.min_pairwise_distance()
        if 2 * config.r1 >= separation:
            logger.debug("necks of radius %g can overlap (curve separation %g); "
                         "overlaps are rejected pointwise", config.r1, separation)

    def __repr__(self):
        return "<%s %d necks r0=%g r1=%g>" % (self.__class__.__name__, len(self.curves),
                                              self.config.r0, self.config.r1)

    def normal_coordinates(self, zs):
        '''Lattice-reduced normal displacements to every curve, shape (m, 32, 2).'''
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        out = np.empty((zs.shape[0], len(self.curves), 2), dtype=complex)
        for k, c in enumerate(self.curves):
            for slot, j in enumerate(c.fixed_factors):
                out[:, k, slot] = self.orbifold.curves[j].nearest_representative(
                    zs[:, j] - self.centers[k, j])
        return out

    def hessian_many(self, zs):
        zs = np.atleast_2d(np.asarray(zs, dtype=complex))
        w = self.normal_coordinates(zs)
        U = np.sum(np.abs(w) ** 2, axis=-1)
        r1sq = self.config.r1 ** 2
        near = U < r1sq
        crowded = np.sum(near, axis=1) > 1
        if np.any(crowded):
            raise GuardedStepError("point %s lies in two necks" % (zs[np.argmax(crowded)],))
        g = np.broadcast_to(np.eye(3, dtype=complex), (zs.shape[0], 3, 3)).copy()
        for k in np.unique(np.nonzero(near)[1]):
            rows = np.nonzero(near[:, k])[0]
            try:
                block = self.potentials[k].hessian_many(w[rows, k, :])
            except DomainError as e:
                raise PreconditionError("point %s lies on the fixed curve %r, where the neck "
                                        "metric is not defined in normal coordinates"
                                        % (zs[rows[0]], self.curves[k])) from e
            i, j = self.curves[k].fixed_factors
            g[np.ix_(rows, [i, j], [i, j])] = block
        return g

    def in_neck(self, zs):
        '''bool array: True where a point is within r₁ of some curve.'''
        U = np.sum(np.abs(self.normal_coordinates(zs)) ** 2, axis=-1)
        return np.any(U < self.config.r1 ** 2, axis=1)
