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

'''Chart-level complex geometry.

Potentials produce Hermitian metrics, metrics produce Ricci forms, and
parametrized immersions pull back the Kähler form and holomorphic volume
forms.  Conventions used throughout:

* the Kähler form is ω = (√−1/2) Σ g_{ij̄} dz_i∧dz̄_j, so the flat metric
  of the potential U = Σ|z_i|² gives ω = Σ dx_i∧dy_i;
* an immersion with complex Jacobian J (n×k) has Hermitian pullback
  H = Jᵀ g J̄; the induced Riemannian metric is Re H and the matrix of
  ι*ω is −Im H;
* special Lagrangian with phase θ means ω|_L = 0 and Im(e^{iθ}Ω)|_L = 0.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['HERMITIAN_TOL', 'RANK_TOL',
           'ComplexChart', 'KahlerPotential', 'RadialPotential', 'FlatPotential',
           'HermitianMetric', 'ParamImmersion', 'AffineImmersion',
           'ReparametrizedImmersion', 'HolomorphicVolumeForm', 'DefectReport',
           'hermitian_pullback', 'induced_metric', 'metric_by_finite_differences',
           'metric_from_potential', 'pullback_two_form', 'pullback_volume_form',
           'ricci_form', 'slag_defect', 'two_form_norm']


import collections

import numpy as np

from . import logger_numerics
from .exceptions import (DegenerateMetricError, DimensionMismatch, DomainError,
                         ImmersionError)
from . import util


#: float: Hermitian symmetry tolerance of metric matrices (relative to their size).
HERMITIAN_TOL = 1e-12

#: float: Relative singular-value threshold of the immersion rank test.
RANK_TOL = 1e-10

_FD_RETRIES = 3


class ComplexChart(collections.namedtuple('ComplexChart', 'dim label')):
    '''A complex coordinate chart z₁, …, z_n.

    .. py:attribute:: dim

        int - Complex dimension n ≥ 1.

    .. py:attribute:: label

        str - Identifier used in reports.
    '''
    __slots__ = ()

    def __new__(cls, dim, label='C^n'):
        if int(dim) < 1:
            raise DimensionMismatch("chart dimension must be at least 1, got %r" % (dim,))
        return super().__new__(cls, int(dim), label)

    def check_point(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.dim:
            raise DimensionMismatch("expected points with %d coordinates on chart %s, got shape %s"
                                    % (self.dim, self.label, z.shape))
        return z


class KahlerPotential:
    '''A real potential φ on a complex chart.

    Subclasses implement :meth:`value` and :meth:`gradient`, and either
    override :meth:`hessian` with exact formulas (setting
    ``has_exact_hessian``) or inherit the finite-difference fallback.
    '''

    has_exact_hessian = False

    def __init__(self, chart, fd_step=util.DEFAULT_FD_STEP):
        self.chart = chart
        self.fd_step = fd_step

    def __repr__(self):
        return "<%s on %s>" % (self.__class__.__name__, self.chart.label)

    def is_admissible(self, z):
        return True

    def check_admissible(self, z):
        z = self.chart.check_point(z)
        if not self.is_admissible(z):
            raise DomainError("point %s is outside the domain of %r" % (np.round(z, 12), self))
        return z

    def value(self, z):
        raise NotImplementedError

    def gradient(self, z):
        '''∂φ/∂z_i.'''
        raise NotImplementedError

    def hessian(self, z):
        '''∂²φ/∂z_i∂z̄_j; finite differences unless overridden.'''
        z = self.check_admissible(z)
        return util.complex_hessian(self.value, z, util.relative_step(z, self.fd_step))

    def hessian_many(self, zs):
        zs = np.asarray(zs, dtype=complex)
        return np.stack([self.hessian(z) for z in zs.reshape(-1, self.chart.dim)]) \
            .reshape(zs.shape[:-1] + (self.chart.dim, self.chart.dim))


class RadialPotential(KahlerPotential):
    '''φ = f(U) + Σ|w|² with U = Σ|z_i|² over the leading ``radial_dim`` coordinates.

    The trailing ``flat_dim`` coordinates (the direction along a singular
    curve) enter through the flat term only.  Subclasses supply
    :meth:`profile` returning (f, f′, f″) as arrays of the shape of U.
    '''

    has_exact_hessian = True
    requires_positive_u = True

    def __init__(self, radial_dim, flat_dim=0, label=None, fd_step=util.DEFAULT_FD_STEP):
        label = label or "C^%d%s" % (radial_dim, " x C^%d" % flat_dim if flat_dim else "")
        super().__init__(ComplexChart(radial_dim + flat_dim, label), fd_step)
        self.radial_dim = radial_dim
        self.flat_dim = flat_dim

    def profile(self, U):
        raise NotImplementedError

    def radial_u(self, z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z[..., :self.radial_dim]) ** 2, axis=-1)

    def is_admissible(self, z):
        return (not self.requires_positive_u) or bool(np.all(self.radial_u(z) > 0))

    def value(self, z):
        z = self.check_admissible(z)
        f, _, _ = self.profile(self.radial_u(z))
        return float(f) + float(np.sum(np.abs(z[self.radial_dim:]) ** 2))

    def gradient(self, z):
        z = self.check_admissible(z)
        _, f1, _ = self.profile(self.radial_u(z))
        grad = np.conj(z).astype(complex)
        grad[:self.radial_dim] *= f1
        return grad

    def hessian(self, z):
        z = self.check_admissible(z)
        return self.hessian_many(z[None, :])[0]

    def hessian_many(self, zs):
        zs = self.chart.check_point(zs)
        shape = zs.shape[:-1]
        flat = zs.reshape(-1, self.chart.dim)
        if not self.is_admissible(flat):
            bad = flat[np.argmin(self.radial_u(flat))]
            raise DomainError("point %s is outside the domain of %r" % (np.round(bad, 12), self))
        r = self.radial_dim
        zr = flat[:, :r]
        _, f1, f2 = self.profile(self.radial_u(flat))
        f1 = np.broadcast_to(np.asarray(f1, dtype=float), (flat.shape[0],))
        f2 = np.broadcast_to(np.asarray(f2, dtype=float), (flat.shape[0],))
        g = np.zeros((flat.shape[0], self.chart.dim, self.chart.dim), dtype=complex)
        g[:, :r, :r] = f1[:, None, None] * np.eye(r) \
            + f2[:, None, None] * np.conj(zr)[:, :, None] * zr[:, None, :]
        g[:, r:, r:] = np.eye(self.flat_dim)
        return g.reshape(shape + (self.chart.dim, self.chart.dim))


class FlatPotential(RadialPotential):
    '''The flat potential U = Σ|z_i|², admissible everywhere.'''

    requires_positive_u = False

    def __init__(self, dim, label=None):
        super().__init__(dim, 0, label=label or "C^%d flat" % dim)

    def profile(self, U):
        U = np.asarray(U, dtype=float)
        return U, np.ones_like(U), np.zeros_like(U)


class HermitianMetric:
    '''Matrix g_{ij̄} of a Kähler metric at a point.

    Args:
        entries (numpy.ndarray): n×n complex matrix.
        point (numpy.ndarray): evaluation point.
    '''

    __slots__ = ('_entries', '_point')

    def __init__(self, entries, point=None, tol=HERMITIAN_TOL):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch("metric must be square, got shape %s" % (entries.shape,))
        scale = max(1.0, float(np.max(np.abs(entries))))
        if np.max(np.abs(entries - entries.conj().T)) > tol * scale:
            raise DegenerateMetricError("metric is not Hermitian at %s" % (point,), point)
        self._entries = entries
        self._point = None if point is None else np.asarray(point)

    def __repr__(self):
        return "<%s dim=%d min_eig=%.6g>" % (self.__class__.__name__, self.dim,
                                             self.min_eigenvalue)

    @property
    def entries(self):
        '''numpy.ndarray: The n×n complex matrix.'''
        return self._entries

    @property
    def point(self):
        '''numpy.ndarray: Where the metric was evaluated.'''
        return self._point

    @property
    def dim(self):
        '''int: Complex dimension.'''
        return self._entries.shape[0]

    @property
    def eigenvalues(self):
        '''numpy.ndarray: Real eigenvalues in ascending order.'''
        return np.linalg.eigvalsh(self._entries)

    @property
    def min_eigenvalue(self):
        '''float: Smallest eigenvalue.'''
        return float(self.eigenvalues[0])

    @property
    def is_positive_definite(self):
        '''bool: True if all eigenvalues are positive.'''
        return self.min_eigenvalue > 0

    @property
    def det(self):
        '''float: Determinant (real for a Hermitian matrix).'''
        return float(np.prod(self.eigenvalues))

    def log_det(self):
        eig = self.eigenvalues
        if eig[0] <= 0:
            raise DegenerateMetricError("metric is not positive definite at %s" % (self._point,),
                                        self._point)
        return float(np.sum(np.log(eig)))


class ParamImmersion:
    '''A map from a real parameter box of dimension k into a complex chart.

    Subclasses implement :meth:`evaluate_many` and :meth:`jacobian_many`
    on arrays of parameters of shape (m, k); the Jacobian is complex of
    shape (m, n, k) with entries ∂z_i/∂t_a.
    '''

    def __init__(self, domain_dim, target, box=None, points_per_axis=8, label=None):
        self.domain_dim = int(domain_dim)
        self.target = target
        self.box = box or util.ParameterBox.cube(self.domain_dim)
        if self.box.dim != self.domain_dim:
            raise DimensionMismatch("parameter box has dimension %d, immersion %d"
                                    % (self.box.dim, self.domain_dim))
        self.points_per_axis = int(points_per_axis)
        self.label = label or self.__class__.__name__

    def __repr__(self):
        return "<%s %s: R^%d -> %s>" % (self.__class__.__name__, self.label,
                                        self.domain_dim, self.target.label)

    def evaluate_many(self, ts):
        raise NotImplementedError

    def jacobian_many(self, ts):
        raise NotImplementedError

    def evaluate(self, t):
        return self.evaluate_many(np.atleast_2d(np.asarray(t, dtype=float)))[0]

    def jacobian(self, t):
        return self.jacobian_many(np.atleast_2d(np.asarray(t, dtype=float)))[0]

    def sample_grid(self, points_per_axis=None):
        return self.box.grid(points_per_axis or self.points_per_axis)

    def check_rank(self, ts, jac=None, tol=RANK_TOL):
        '''Raises :class:`ImmersionError` if any Jacobian in the batch drops rank.'''
        ts = np.atleast_2d(ts)
        jac = self.jacobian_many(ts) if jac is None else jac
        real = np.concatenate([jac.real, jac.imag], axis=-2)
        sv = np.linalg.svd(real, compute_uv=False)
        ratio = sv[..., -1] / np.maximum(sv[..., 0], np.finfo(float).tiny)
        worst = int(np.argmin(ratio))
        if ratio[worst] < tol:
            raise ImmersionError("Jacobian of %r is rank deficient at t=%s" % (self, ts[worst]),
                                 ts[worst], float(sv[worst, -1]))
        return jac


class AffineImmersion(ParamImmersion):
    '''t ↦ z₀ + J t for a constant complex n×k matrix J.'''

    def __init__(self, offset, matrix, box=None, points_per_axis=8, label=None):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        offset = np.asarray(offset, dtype=complex)
        if offset.shape != (matrix.shape[0],):
            raise DimensionMismatch("offset shape %s does not match a %dx%d Jacobian"
                                    % (offset.shape, matrix.shape[0], matrix.shape[1]))
        super().__init__(matrix.shape[1], ComplexChart(matrix.shape[0]), box,
                         points_per_axis, label)
        self.offset = offset
        self.matrix = matrix

    def evaluate_many(self, ts):
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        return self.offset + ts @ self.matrix.T

    def jacobian_many(self, ts):
        ts = np.atleast_2d(ts)
        return np.broadcast_to(self.matrix, (ts.shape[0],) + self.matrix.shape).copy()


class ReparametrizedImmersion(ParamImmersion):
    '''The immersion s ↦ ι(L s + b) for an invertible real matrix L.'''

    def __init__(self, base, matrix, offset, box=None, points_per_axis=None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (base.domain_dim, base.domain_dim):
            raise DimensionMismatch("reparametrization must be %dx%d" % ((base.domain_dim,) * 2))
        super().__init__(base.domain_dim, base.target, box or base.box,
                         points_per_axis or base.points_per_axis, "%s reparametrized" % base.label)
        self.base = base
        self.matrix = matrix
        self.offset = np.asarray(offset, dtype=float)

    def _map(self, ss):
        return np.atleast_2d(ss) @ self.matrix.T + self.offset

    def evaluate_many(self, ss):
        return self.base.evaluate_many(self._map(ss))

    def jacobian_many(self, ss):
        return self.base.jacobian_many(self._map(ss)) @ self.matrix


class HolomorphicVolumeForm:
    '''Ω = c(z) dz₁∧…∧dz_n on a chart.

    Args:
        chart (ComplexChart): the chart.
        coefficient (callable): maps points of shape (m, n) to c of shape (m,);
            None means c ≡ 1.
    '''

    def __init__(self, chart, coefficient=None, label=None):
        self.chart = chart
        self._coefficient = coefficient
        self.label = label or "dz1^...^dz%d" % chart.dim

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, self.label)

    @classmethod
    def standard(cls, dim):
        return cls(ComplexChart(dim))

    def coefficient_many(self, zs):
        zs = np.atleast_2d(self.chart.check_point(zs))
        if self._coefficient is None:
            return np.ones(zs.shape[0], dtype=complex)
        c = np.asarray(self._coefficient(zs), dtype=complex)
        if np.any(c == 0):
            raise DomainError("volume form %r vanishes at a sampled point" % self)
        return c

    def coefficient(self, z):
        return complex(self.coefficient_many(np.asarray(z)[None, :])[0])


class DefectReport:
    '''Sampled calibration defects of an immersion.

    The ω-defect is the Frobenius norm of ι*ω in an orthonormal frame of
    the induced metric; the Im-defect is |Im(e^{iθ}ι*Ω)| divided by the
    induced volume density.  ``omega_raw_sup`` is the Frobenius norm in
    the raw parameter basis.
    '''

    __slots__ = ('omega_sup', 'omega_mean', 'omega_raw_sup', 'im_sup', 'im_mean',
                 'phase', 'samples')

    def __init__(self, omega_sup, omega_mean, omega_raw_sup, im_sup, im_mean, phase, samples):
        self.omega_sup = float(omega_sup)
        self.omega_mean = float(omega_mean)
        self.omega_raw_sup = float(omega_raw_sup)
        self.im_sup = float(im_sup)
        self.im_mean = float(im_mean)
        self.phase = phase
        self.samples = int(samples)

    def __repr__(self):
        return "<%s omega=%.3g im=%.3g theta=%.6f samples=%d>" % (
            self.__class__.__name__, self.omega_sup, self.im_sup, self.phase.radians, self.samples)

    @property
    def max_defect(self):
        '''float: The larger of the two sup defects.'''
        return max(self.omega_sup, self.im_sup)

    def to_dict(self):
        return {'omega_sup': self.omega_sup, 'omega_mean': self.omega_mean,
                'omega_raw_sup': self.omega_raw_sup, 'im_sup': self.im_sup,
                'im_mean': self.im_mean, 'theta': self.phase.radians,
                'samples': self.samples}


def metric_from_potential(potential, z):
    '''The complex Hessian of a potential as a :class:`HermitianMetric`.

    Raises:
        :class:`slaglab.exceptions.DomainError` at inadmissible points.
    '''
    z = potential.check_admissible(z)
    return HermitianMetric(potential.hessian(z), z)


def metric_by_finite_differences(potential, z, h=util.DEFAULT_FD_STEP):
    '''Complex Hessian of the potential value by central differences.

    Cross-check of the exact formulas; ``h`` is relative to |z|.
    '''
    z = potential.check_admissible(z)
    return HermitianMetric(util.complex_hessian(potential.value, z, util.relative_step(z, h)), z,
                           tol=1e-6)


def _log_det_metric(potential, z):
    if not potential.is_admissible(z):
        raise DomainError("stencil point %s is inadmissible" % (np.round(z, 12),))
    eig = np.linalg.eigvalsh(potential.hessian(z))
    if eig[0] <= 0:
        raise DegenerateMetricError("metric is not positive definite at %s" % (z,), z)
    return float(np.sum(np.log(eig)))


def ricci_form(potential, z, h=util.DEFAULT_FD_STEP):
    '''−∂∂̄ log det g by central differences of the log-determinant.

    ``h`` is relative to the coordinate magnitude.  When a stencil point
    leaves the admissible domain or the metric degenerates there, the step
    is halved up to three times before giving up.

    Raises:
        :class:`slaglab.exceptions.DegenerateMetricError` with the offending point.
    '''
    z = potential.check_admissible(z)
    step = util.relative_step(z, h)
    failure = None
    for attempt in range(_FD_RETRIES + 1):
        try:
            hess = util.complex_hessian(lambda w: _log_det_metric(potential, w), z, step)
            return -0.5 * (hess + hess.conj().T)
        except (DomainError, DegenerateMetricError) as e:
            failure = e
            logger_numerics.debug("ricci stencil failed at step %.3g (%s), shrinking", step, e)
            step *= 0.5
    point = getattr(failure, 'point', None)
    raise DegenerateMetricError("Ricci stencil around %s left the admissible region: %s"
                                % (np.round(z, 12), failure), z if point is None else point)


def hermitian_pullback(potential, immersion, ts, check_rank=True):
    '''H = Jᵀ g J̄ for a batch of parameters, with the points and Jacobians.'''
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    jac = immersion.jacobian_many(ts)
    if check_rank:
        immersion.check_rank(ts, jac)
    zs = immersion.evaluate_many(ts)
    g = potential.hessian_many(zs)
    H = np.einsum('mia,mij,mjb->mab', jac, g, jac.conj())
    return H, zs, jac


def pullback_two_form(potential, immersion, t):
    '''Matrix of ι*ω in the parameter basis; antisymmetric by construction.

    Raises:
        :class:`slaglab.exceptions.ImmersionError` on a rank-deficient Jacobian.
    '''
    H, _, _ = hermitian_pullback(potential, immersion, t)
    M = -H[0].imag
    return 0.5 * (M - M.T)


def induced_metric(potential, immersion, t):
    '''The induced Riemannian metric Re(Jᵀ g J̄) at t.'''
    H, _, _ = hermitian_pullback(potential, immersion, t)
    G = H[0].real
    return 0.5 * (G + G.T)


def pullback_volume_form(volume_form, immersion, t):
    '''Coefficient c(z(t))·det(∂z/∂t) of ι*Ω against dt₁∧…∧dt_n.

    Raises:
        :class:`slaglab.exceptions.DimensionMismatch` unless k equals n.
    '''
    if immersion.domain_dim != volume_form.chart.dim:
        raise DimensionMismatch("pullback of an (%d,0)-form needs a %d-dimensional immersion, got %d"
                                % (volume_form.chart.dim, volume_form.chart.dim, immersion.domain_dim))
    t = np.atleast_2d(np.asarray(t, dtype=float))
    z = immersion.evaluate_many(t)
    return complex(volume_form.coefficient_many(z)[0] * np.linalg.det(immersion.jacobian_many(t)[0]))


def two_form_norm(M):
    '''Norm of a 2-form from its antisymmetric matrix: sqrt(Σ_{a<b} M_ab²).'''
    M = np.asarray(M)
    return np.sqrt(0.5 * np.sum(M * M, axis=(-2, -1)))


def _orthonormal_frame_norm(M, G):
    # Frobenius norm of G^{-1/2} M G^{-1/2}
    eig, vec = np.linalg.eigh(G)
    if np.any(eig <= 0):
        raise DegenerateMetricError("induced metric is not positive definite")
    inv_sqrt = np.einsum('...ij,...j,...kj->...ik', vec, 1.0 / np.sqrt(eig), vec)
    Mo = inv_sqrt @ M @ inv_sqrt
    return np.sqrt(np.sum(Mo * Mo, axis=(-2, -1)))


def slag_defect(potential, volume_form, immersion, theta="fit", points_per_axis=None):
    '''Sampled special Lagrangian defects of an immersion.

    Args:
        potential (KahlerPotential): ambient Kähler potential.
        volume_form (HolomorphicVolumeForm): ambient holomorphic volume form.
        immersion (ParamImmersion): k = n dimensional immersion.
        theta: a phase in radians, a :class:`slaglab.util.Phase`, or "fit"
            to choose θ so Im(e^{iθ}ι*Ω) vanishes at the box centroid.
        points_per_axis (int): overrides the immersion's sample grid.

    Returns:
        :class:`DefectReport`
    '''
    ts = immersion.sample_grid(points_per_axis)
    if ts.shape[0] == 0:
        raise ValueError("empty sample grid")
    if immersion.domain_dim != volume_form.chart.dim:
        raise DimensionMismatch("slag_defect needs a middle-dimensional immersion")
    if isinstance(theta, str):
        if theta != "fit":
            raise ValueError("theta must be a number, a Phase or 'fit'")
        phase = util.Phase.fit(pullback_volume_form(volume_form, immersion, immersion.box.centroid))
    elif isinstance(theta, util.Phase):
        phase = theta
    else:
        phase = util.Phase(theta)

    H, zs, jac = hermitian_pullback(potential, immersion, ts)
    M = -H.imag
    M = 0.5 * (M - np.swapaxes(M, -1, -2))
    G = H.real
    G = 0.5 * (G + np.swapaxes(G, -1, -2))
    omega = _orthonormal_frame_norm(M, G)
    omega_raw = np.sqrt(np.sum(M * M, axis=(-2, -1)))
    vol = volume_form.coefficient_many(zs) * np.linalg.det(jac)
    density = np.sqrt(np.linalg.det(G))
    im = np.abs((phase.unit * vol).imag) / density
    return DefectReport(omega.max(), omega.mean(), omega_raw.max(), im.max(), im.mean(),
                        phase, ts.shape[0])
