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

'''Deforming torus fibers toward special Lagrangians.

A torus fiber s ↦ (α̂ + is₁, β̂ + is₂, γ̂ + is₃) is deformed in the normal
(real) directions by a truncated trigonometric field ξ(s).  Its calibration
defect

    E = Σ_grid w·(‖ι*ω‖² + Im(e^{iθ}ι*Ω)²)

is minimized by preconditioned gradient descent with a backtracking line
search.  The ω and Ω parts are differentiated analytically in the Jacobian
X = ∂ξ/∂s; the dependence of the ambient metric on the point is
differentiated by central differences unless the metric is flat.

:func:`build_surgered_torus` assembles the torus obtained by replacing
discs of T₀β̂₀ around the four curves it meets with pieces of L₀₀ × T_β̂
written through the blowup chart.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['DEFAULT_GUARD', 'DEFAULT_MODES',
           'TrigBasis', 'DeformedTorus', 'GradientCheck', 'MinimizeResult',
           'SurgeredTorus', 'SurgeryReport',
           'build_surgered_torus', 'defect_energy', 'energy_and_gradient',
           'fiber_distance', 'gradient_check', 'minimize_defect']


import collections
import math

import numpy as np

from . import logger, logger_numerics
from .exceptions import (CollarMismatchError, DegenerateMetricError, DomainError,
                         GuardedStepError, PreconditionError)
from . import geom
from . import gluing
from . import orbifold as _orbifold
from . import util


#: int: Default number of Fourier modes per direction.
DEFAULT_MODES = 4

#: float: Largest admissible |ξ| on the quadrature grid.
DEFAULT_GUARD = 0.25

_POSITION_STEP = 1e-6
_STALL_WINDOW = 20
_STALL_RTOL = 1e-12
_ARMIJO = 1e-4


class TrigBasis:
    '''Real trigonometric basis 1, cos(2πks/L), sin(2πks/L) for k = 1..N.

    Index 0 is the constant, 2k−1 the cosine and 2k the sine of frequency k.
    '''

    def __init__(self, modes, length=1.0):
        if int(modes) < 0:
            raise PreconditionError("number of modes must be non-negative")
        self.modes = int(modes)
        self.length = float(length)
        self.frequencies = np.array([0] + [k for k in range(1, self.modes + 1) for _ in (0, 1)])

    def __repr__(self):
        return "<%s N=%d L=%g>" % (self.__class__.__name__, self.modes, self.length)

    def __len__(self):
        return 2 * self.modes + 1

    def values(self, s):
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape + (len(self),))
        out[..., 0] = 1.0
        for k in range(1, self.modes + 1):
            arg = 2 * math.pi * k * s / self.length
            out[..., 2 * k - 1] = np.cos(arg)
            out[..., 2 * k] = np.sin(arg)
        return out

    def derivatives(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (len(self),))
        for k in range(1, self.modes + 1):
            omega = 2 * math.pi * k / self.length
            arg = omega * s
            out[..., 2 * k - 1] = -omega * np.sin(arg)
            out[..., 2 * k] = omega * np.cos(arg)
        return out


class DeformedTorus(geom.ParamImmersion):
    '''A torus fiber moved by ξ(s) = Σ C[c, a, b, d]·φ_a(s₁)φ_b(s₂)φ_d(s₃) in Re z_c.

    Args:
        base (geom.AffineImmersion): a torus fiber with Jacobian iI.
        modes (int): trigonometric modes per direction.
        coefficients (numpy.ndarray): shape (3, 2N+1, 2N+1, 2N+1), zeros if None.
        grid (int): quadrature points per axis.
        guard (float): bound on |ξ| at the quadrature points.
    '''

    def __init__(self, base, modes=DEFAULT_MODES, coefficients=None, grid=12, guard=DEFAULT_GUARD):
        if base.domain_dim != 3 or not np.allclose(base.matrix, 1j * np.eye(3)):
            raise PreconditionError("deformations start from a torus fiber with Jacobian iI")
        super().__init__(3, base.target, base.box, grid, "%s deformed" % base.label)
        self.base = base
        self.modes = int(modes)
        self.guard = float(guard)
        self.bases = [TrigBasis(self.modes, w) for w in self.box.widths]
        size = 2 * self.modes + 1
        if coefficients is None:
            coefficients = np.zeros((3, size, size, size))
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (3, size, size, size):
            raise PreconditionError("coefficients must have shape %s, got %s"
                                    % ((3, size, size, size), coefficients.shape))
        self.coefficients = coefficients
        axes = self.box.axes(grid)
        self._grid_values = [b.values(s) for b, s in zip(self.bases, axes)]
        self._grid_derivs = [b.derivatives(s) for b, s in zip(self.bases, axes)]

    def with_coefficients(self, coefficients):
        return DeformedTorus(self.base, self.modes, coefficients, self.points_per_axis, self.guard)

    @property
    def weight(self):
        '''float: Quadrature weight of one grid cell.'''
        return self.box.cell_volume(self.points_per_axis)

    def sobolev_weights(self):
        '''1/(1 + |2πk/L|²) per coefficient, broadcast to the coefficient shape.'''
        k2 = [(2 * math.pi * b.frequencies / b.length) ** 2 for b in self.bases]
        total = k2[0][:, None, None] + k2[1][None, :, None] + k2[2][None, None, :]
        return np.broadcast_to(1.0 / (1.0 + total), self.coefficients.shape)

    def deformation_many(self, ts):
        '''ξ of shape (m, 3) and X = ∂ξ/∂s of shape (m, 3, 3) at arbitrary parameters.'''
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        vals = [b.values(ts[:, k]) for k, b in enumerate(self.bases)]
        ders = [b.derivatives(ts[:, k]) for k, b in enumerate(self.bases)]
        C = self.coefficients
        xi = np.einsum('cabd,ma,mb,md->mc', C, *vals)
        X = np.stack([np.einsum('cabd,ma,mb,md->mc', C, *(ders[k] if j == k else vals[j]
                                                            for j in range(3)))
                      for k in range(3)], axis=-1)
        return xi, X

    def grid_deformation(self):
        '''ξ and X on the quadrature grid, ordered like ``sample_grid()``.'''
        C = self.coefficients
        B, D = self._grid_values, self._grid_derivs
        xi = np.einsum('cabd,pa,qb,rd->pqrc', C, *B).reshape(-1, 3)
        X = np.stack([np.einsum('cabd,pa,qb,rd->pqrc', C, *(D[k] if j == k else B[j]
                                                            for j in range(3))).reshape(-1, 3)
                      for k in range(3)], axis=-1)
        return xi, X

    def check_guard(self, xi=None):
        xi = self.grid_deformation()[0] if xi is None else xi
        size = float(np.max(np.abs(xi))) if xi.size else 0.0
        if size > self.guard:
            raise GuardedStepError("deformation %.3g exceeds the guard %.3g" % (size, self.guard))
        return size

    def evaluate_many(self, ts):
        xi, _ = self.deformation_many(ts)
        return self.base.evaluate_many(ts) + xi

    def jacobian_many(self, ts):
        _, X = self.deformation_many(ts)
        return self.base.jacobian_many(ts) + X

    def back_project(self, gx, gX):
        '''Coefficient gradient from per-point gradients in ξ (m, 3) and X (m, 3, 3).'''
        n = self.points_per_axis
        B, D = self._grid_values, self._grid_derivs
        gx = gx.reshape(n, n, n, 3)
        gX = gX.reshape(n, n, n, 3, 3)
        out = np.einsum('pqrc,pa,qb,rd->cabd', gx, *B)
        for k in range(3):
            out += np.einsum('pqrc,pa,qb,rd->cabd', gX[..., k],
                             *(D[k] if j == k else B[j] for j in range(3)))
        return out


def _resolve_phase(theta, volume_form, torus):
    if isinstance(theta, util.Phase):
        return theta
    if isinstance(theta, str):
        if theta != "fit":
            raise ValueError("theta must be a number, a Phase or 'fit'")
        return util.Phase.fit(geom.pullback_volume_form(volume_form, torus.base, torus.box.centroid))
    return util.Phase(theta)


def _is_analytic(ambient, volume_form):
    return isinstance(ambient, geom.FlatPotential) and volume_form._coefficient is None


def _density(g, c, J, phase):
    H = np.einsum('mia,mij,mjb->mab', J, g, J.conj())
    M = -H.imag
    v = phase.unit * c * np.linalg.det(J)
    return np.sum(M * M, axis=(-2, -1)) + v.imag ** 2, M, v


def _grid_state(torus, ambient, volume_form):
    xi, X = torus.grid_deformation()
    torus.check_guard(xi)
    ts = torus.sample_grid()
    zs = torus.base.evaluate_many(ts) + xi
    J = 1j * np.eye(3) + X.astype(complex)
    try:
        g = ambient.hessian_many(zs)
        c = volume_form.coefficient_many(zs)
    except (DomainError, DegenerateMetricError) as e:
        raise GuardedStepError("deformed torus left the admissible region: %s" % e)
    return zs, J, g, c


def defect_energy(torus, ambient, volume_form, theta="fit"):
    '''Quadrature of ‖ι*ω‖² + Im(e^{iθ}ι*Ω)² over the torus grid.

    Raises:
        :class:`slaglab.exceptions.GuardedStepError` if the deformation leaves
        the guard or the ambient domain.
    '''
    phase = _resolve_phase(theta, volume_form, torus)
    zs, J, g, c = _grid_state(torus, ambient, volume_form)
    e, _, _ = _density(g, c, J, phase)
    return float(torus.weight * np.sum(e))


def energy_and_gradient(torus, ambient, volume_form, theta="fit", position_step=_POSITION_STEP):
    '''E and dE/dC for the coefficient array C.

    Returns:
        (float, numpy.ndarray, str): energy, gradient shaped like the
        coefficients, and the derivative mode ("analytic" or "mixed").
    '''
    phase = _resolve_phase(theta, volume_form, torus)
    zs, J, g, c = _grid_state(torus, ambient, volume_form)
    e, M, v = _density(g, c, J, phase)

    Mt = np.swapaxes(M, -1, -2)
    gJbar = g @ J.conj()
    Jtg = np.swapaxes(J, -1, -2) @ g
    gX = -2.0 * (gJbar.imag @ Mt + np.swapaxes(Jtg.imag, -1, -2) @ M)
    Jinv_t = np.swapaxes(np.linalg.inv(J), -1, -2)
    gX += 2.0 * v.imag[:, None, None] * (v[:, None, None] * Jinv_t).imag

    gx = np.zeros((zs.shape[0], 3))
    mode = "analytic"
    if not _is_analytic(ambient, volume_form):
        mode = "mixed"
        for j in range(3):
            shifted = []
            for sign in (1.0, -1.0):
                zj = zs.copy()
                zj[:, j] += sign * position_step
                try:
                    ej, _, _ = _density(ambient.hessian_many(zj), volume_form.coefficient_many(zj),
                                        J, phase)
                except (DomainError, DegenerateMetricError) as err:
                    raise GuardedStepError("position stencil left the admissible region: %s" % err)
                shifted.append(ej)
            gx[:, j] = (shifted[0] - shifted[1]) / (2 * position_step)

    grad = torus.weight * torus.back_project(gx, gX)
    return float(torus.weight * np.sum(e)), grad, mode


class GradientCheck(collections.namedtuple('GradientCheck', 'max_relative_error errors mode')):
    '''Directional gradients against central differences of the energy.'''
    __slots__ = ()


def gradient_check(torus, ambient, volume_form, theta="fit", samples=10, rng=None,
                   amplitude=0.005, step=1e-6):
    '''Compares ⟨∇E, D⟩ with (E(C + hD) − E(C − hD))/2h at random coefficients.'''
    rng = util.make_rng(0) if rng is None else rng
    phase = _resolve_phase(theta, volume_form, torus)
    errors = []
    mode = None
    for _ in range(samples):
        C = torus.coefficients + amplitude * rng.standard_normal(torus.coefficients.shape) \
            * torus.sobolev_weights()
        D = rng.standard_normal(C.shape)
        D /= np.linalg.norm(D)
        trial = torus.with_coefficients(C)
        _, grad, mode = energy_and_gradient(trial, ambient, volume_form, phase)
        plus = defect_energy(torus.with_coefficients(C + step * D), ambient, volume_form, phase)
        minus = defect_energy(torus.with_coefficients(C - step * D), ambient, volume_form, phase)
        fd = (plus - minus) / (2 * step)
        exact = float(np.sum(grad * D))
        errors.append(abs(fd - exact) / max(abs(fd), abs(exact), np.finfo(float).tiny))
    return GradientCheck(float(max(errors)), errors, mode)


class MinimizeResult(collections.namedtuple(
        'MinimizeResult', 'torus history converged stalled iterations mode message')):
    '''Outcome of :func:`minimize_defect`; ``history`` holds E per accepted iterate.'''
    __slots__ = ()


def minimize_defect(torus, ambient, volume_form, theta="fit", tol=1e-12, max_iter=200,
                    precondition=True, initial_step=1.0, max_backtracks=40):
    '''Preconditioned gradient descent on the defect energy.

    Each step backtracks from the current trial step with a quadratic
    interpolation model until the Armijo condition holds; steps that leave
    the guard count as rejected trials.  The history is strictly decreasing.

    Returns:
        :class:`MinimizeResult`; a stall (relative decrease below 1e−12 over
        20 iterations, or a failed line search) is reported, not raised.
    '''
    phase = _resolve_phase(theta, volume_form, torus)
    E, grad, mode = energy_and_gradient(torus, ambient, volume_form, phase)
    if not np.isfinite(E):
        raise PreconditionError("initial defect energy is not finite")
    history = [E]
    if E < tol:
        return MinimizeResult(torus, history, True, False, 0, mode, "already below tolerance")

    P = torus.sobolev_weights() if precondition else np.ones_like(torus.coefficients)
    t = initial_step
    current = torus
    for iteration in range(1, max_iter + 1):
        direction = -P * grad
        slope = float(np.sum(grad * direction))
        if not slope < 0:
            return MinimizeResult(current, history, False, True, iteration - 1, mode,
                                  "gradient vanished at E=%.3e" % E)
        accepted = None
        for _ in range(max_backtracks):
            trial = current.with_coefficients(current.coefficients + t * direction)
            try:
                E_trial, grad_trial, _ = energy_and_gradient(trial, ambient, volume_form, phase)
            except GuardedStepError as e:
                logger_numerics.debug("step %.3e rejected: %s", t, e)
                t *= 0.5
                continue
            if E_trial <= E + _ARMIJO * t * slope:
                accepted = (trial, E_trial, grad_trial)
                break
            curvature = E_trial - E - slope * t
            t_quad = -slope * t * t / (2 * curvature) if curvature > 0 else 0.5 * t
            t = min(max(t_quad, 0.1 * t), 0.5 * t)
        if accepted is None:
            logger.warning("line search failed after %d trials at E=%.3e", max_backtracks, E)
            return MinimizeResult(current, history, False, True, iteration - 1, mode,
                                  "line search failed")
        current, E_new, grad = accepted
        curvature = E_new - E - slope * t
        t_next = -slope * t * t / (2 * curvature) if curvature > 0 else 2 * t
        t = min(max(t_next, 0.1 * t), 4 * t)
        E = E_new
        history.append(E)
        logger_numerics.debug("iteration %d: E=%.6e step=%.3e", iteration, E, t)
        if E < tol:
            return MinimizeResult(current, history, True, False, iteration, mode, "converged")
        if len(history) > _STALL_WINDOW:
            old = history[-_STALL_WINDOW - 1]
            if (old - E) / old < _STALL_RTOL:
                logger.warning("minimizer stalled at E=%.3e after %d iterations", E, iteration)
                return MinimizeResult(current, history, False, True, iteration, mode, "stalled")
    return MinimizeResult(current, history, False, False, max_iter, mode, "iteration limit")


def fiber_distance(torus):
    '''Largest half-oscillation of ξ on the grid: the distance to the nearest flat fiber.'''
    xi, _ = torus.grid_deformation()
    return float(np.max(0.5 * (xi.max(axis=0) - xi.min(axis=0))))


_CHARTS = (_orbifold.BlowupChart(2, 0), _orbifold.BlowupChart(2, 1))

# φ-range of each blowup chart on the real circle of the divisor
_CHART_ANGLES = ((-0.25 * math.pi, 0.25 * math.pi), (0.25 * math.pi, 0.75 * math.pi))


class _PuncturedFiber(geom.AffineImmersion):
    # T₀β̂₀ sampled away from discs around the surgered curves
    def __init__(self, fiber, centers, radius, points_per_axis):
        super().__init__(fiber.offset, fiber.matrix, fiber.box, points_per_axis, fiber.label + " punctured")
        self.centers = centers
        self.radius = radius

    def sample_grid(self, points_per_axis=None):
        ts = super().sample_grid(points_per_axis)
        widths = self.box.widths
        keep = np.ones(ts.shape[0], dtype=bool)
        for c1, c3 in self.centers:
            d1 = np.mod(ts[:, 0] - c1, widths[0])
            d3 = np.mod(ts[:, 2] - c3, widths[2])
            d1 = np.minimum(d1, widths[0] - d1)
            d3 = np.minimum(d3, widths[2] - d3)
            keep &= np.hypot(d1, d3) > self.radius
        return ts[keep]


class _ChartPiece(geom.ParamImmersion):
    '''L₀₀ × T_β̂ around one curve, in one blowup chart of its neck.

    Parameters are (u, φ, s₂) with u = ρ² running from the divisor u = 0 out
    to r_out².  In chart coordinates the piece is p = −u·lead(φ)²,
    q = other(φ)/lead(φ), where lead is cos φ in chart 1 and sin φ in
    chart 2.  On the collar r_in ≤ √u ≤ r_out it is blended with the cutoff
    into the flat fiber lifted through the same chart.
    '''

    fd_step = 1e-7

    def __init__(self, surgered, index, direction, points_per_axis):
        lo, hi = _CHART_ANGLES[direction]
        box = util.ParameterBox((0.0, lo, 0.0), (surgered.outer_radius ** 2, hi, surgered.period2))
        potential = gluing.BlowupChartPotential(surgered.neck_potentials[index], direction)
        super().__init__(3, potential.chart, box, points_per_axis,
                         "L00 x T(%g) at %s, chart %d" % (surgered.beta_hat, surgered.centers[index],
                                                          direction + 1))
        self.surgered = surgered
        self.index = index
        self.direction = direction
        self.potential = potential
        self.chart = _CHARTS[direction]
        coefficient = surgered.chart_volume
        self.volume_form = geom.HolomorphicVolumeForm(
            potential.chart, lambda zs: np.full(zs.shape[0], coefficient),
            "dz1^dz2^dz3 in %s" % potential.chart.label)

    def _lead(self, phi):
        c, s = np.cos(phi), np.sin(phi)
        return (c, s) if self.direction == 0 else (s, c)

    def chart_map_many(self, ts):
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        u, phi, s2 = ts[:, 0], ts[:, 1], ts[:, 2]
        lead, other = self._lead(phi)
        i, j = self.potential.slots
        out = np.empty((ts.shape[0], 3), dtype=complex)
        out[:, i] = -u * lead * lead
        out[:, j] = other / lead
        out[:, 1] = self.surgered.beta_hat + 1j * s2
        return out

    def torus_map_many(self, ts):
        '''The flat fiber at polar offset (√u, φ) from the curve, lifted into the chart.'''
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        u, phi, s2 = ts[:, 0], ts[:, 1], ts[:, 2]
        sur = self.surgered
        c1, c3 = sur.centers[self.index]
        rho = np.sqrt(u)
        z = sur.fiber.evaluate_many(np.stack([c1 + rho * np.cos(phi), s2, c3 + rho * np.sin(phi)], -1))
        center = sur.curves[self.index].center(sur.orbifold.curves)
        w = np.stack([sur.orbifold.curves[j].nearest_representative(z[:, j] - center[j])
                      for j in (0, 2)], -1)
        c = self.chart.to_chart(w)
        return np.stack([c[:, 0], z[:, 1], c[:, 1]], -1)

    def _blend(self, ts):
        # χ(√u)·(torus − chart), zero inside r_in
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        out = np.zeros((ts.shape[0], 3), dtype=complex)
        sur = self.surgered
        rho = np.sqrt(np.maximum(ts[:, 0], 0.0))
        collar = rho > sur.inner_radius
        if np.any(collar):
            sub = ts[collar]
            chi = gluing.cutoff(rho[collar], sur.inner_radius, sur.outer_radius, sur.neck.cutoff_order)
            out[collar] = chi[:, None] * (self.torus_map_many(sub) - self.chart_map_many(sub))
        return out

    def evaluate_many(self, ts):
        return self.chart_map_many(ts) + self._blend(ts)

    def jacobian_many(self, ts):
        ts = np.atleast_2d(np.asarray(ts, dtype=float))
        u, phi = ts[:, 0], ts[:, 1]
        lead, other = self._lead(phi)
        sign = 1.0 if self.direction == 0 else -1.0
        i, j = self.potential.slots
        jac = np.zeros((ts.shape[0], 3, 3), dtype=complex)
        jac[:, i, 0] = -lead * lead
        jac[:, i, 1] = 2 * sign * u * lead * other
        jac[:, j, 1] = sign / (lead * lead)
        jac[:, 1, 2] = 1j
        for k in (0, 1):
            e = np.zeros(3)
            e[k] = self.fd_step
            jac[:, :, k] += (self._blend(ts + e) - self._blend(ts - e)) / (2 * self.fd_step)
        return jac

    def mismatch(self, samples=64):
        '''Largest |torus − chart| in chart coordinates over the collar.'''
        sur = self.surgered
        u = np.linspace(sur.inner_radius ** 2, sur.outer_radius ** 2, 5)
        phi = np.linspace(self.box.lower[1], self.box.upper[1], samples)
        s2 = np.array([0.0, 0.5 * sur.period2])
        ts = np.stack([m.ravel() for m in np.meshgrid(u, phi, s2, indexing='ij')], -1)
        return float(np.max(np.abs(self.torus_map_many(ts) - self.chart_map_many(ts))))

    def divisor_samples(self, samples=64):
        phi = np.linspace(self.box.lower[1], self.box.upper[1], samples)
        zero = np.zeros_like(phi)
        return np.stack([zero, phi, zero], -1)


class SurgeryReport(collections.namedtuple(
        'SurgeryReport', 'collars divisor outer inner energy collar_energy max_defect')):
    '''Collar mismatches, divisor residuals, defect reports of the pieces and the energy split.'''
    __slots__ = ()

    def to_dict(self):
        return {'collars': list(self.collars), 'divisor': dict(self.divisor),
                'outer': self.outer.to_dict(), 'inner': [r.to_dict() for r in self.inner],
                'energy': self.energy, 'collar_energy': self.collar_energy,
                'max_defect': self.max_defect}


class SurgeredTorus:
    '''T₀β̂₀ with discs around its four singular curves replaced by L₀₀ × T_β̂.

    Each replacement is built in the two blowup charts of its neck, where it
    reaches the exceptional divisor and the glued metric is smooth.

    Args:
        orbifold (slaglab.orbifold.Orbifold): the orbifold, pure imaginary periods.
        beta_hat (float): real part of the E₂ coordinate.
        a (float): neck parameter of the ambient glued metric.
        radii (tuple): inner and outer collar radius.
        neck (gluing.NeckConfig): ambient neck radii; a is taken from ``a``.
    '''

    def __init__(self, orbifold, beta_hat, a, radii=(0.12, 0.18), neck=None, points_per_axis=8):
        frac = float(beta_hat) % 1.0
        if min(abs(frac - 0.25), abs(frac - 0.75)) < orbifold.intersect_tol:
            raise PreconditionError("beta_hat=%r meets the fixed points of alpha on E2" % beta_hat)
        self.inner_radius, self.outer_radius = float(radii[0]), float(radii[1])
        if not 0 < self.inner_radius < self.outer_radius:
            raise PreconditionError("surgery radii need 0 < r_in < r_out")
        if not a > 0:
            raise PreconditionError("surgery needs a resolved neck, got a=%r" % (a,))
        self.orbifold = orbifold
        self.beta_hat = float(beta_hat)
        self.a = float(a)
        neck = neck or gluing.NeckConfig(r0=0.1, r1=0.2, a=a, a_list=[a])
        self.neck = neck.model_copy(update={'a': self.a, 'a_vector': None})
        self.ambient = gluing.NeckAtlas(orbifold, self.neck)
        self.volume_form = geom.HolomorphicVolumeForm.standard(3)
        self.chart_volume = _orbifold.volume_form_in_blowup_chart(2)
        self.phase = util.Phase(math.pi / 2)

        _, met = orbifold.genericity(0.0, self.beta_hat, 0.0)
        self.curves = [c for c in met if c.source == 'beta']
        if len(self.curves) != 4:
            raise PreconditionError("expected T(0, %g, 0) to meet four beta-curves, found %d"
                                    % (beta_hat, len(self.curves)))
        self.centers = [(c.center(orbifold.curves)[0].imag, c.center(orbifold.curves)[2].imag)
                        for c in self.curves]
        half_gap = 0.5 * min(math.hypot(p[0] - q[0], p[1] - q[1])
                             for i, p in enumerate(self.centers) for q in self.centers[i + 1:])
        if self.outer_radius >= half_gap:
            raise PreconditionError("collar radius %g overlaps neighbouring discs" % self.outer_radius)
        index = {c.key: k for k, c in enumerate(self.ambient.curves)}
        self.neck_potentials = [self.ambient.potentials[index[c.key]] for c in self.curves]
        self.period2 = orbifold.curves[1].tau.imag
        self.fiber = orbifold.torus_fiber(0.0, self.beta_hat, 0.0, points_per_axis)
        self.outer = _PuncturedFiber(self.fiber, self.centers, self.outer_radius, points_per_axis)
        self.pieces = [_ChartPiece(self, k, d, points_per_axis)
                       for k in range(len(self.curves)) for d in (0, 1)]

    def __repr__(self):
        return "<%s beta=%g a=%g collars %g..%g>" % (self.__class__.__name__, self.beta_hat,
                                                    self.a, self.inner_radius, self.outer_radius)

    def collar_mismatch(self):
        '''One entry per curve: the worst chart-coordinate mismatch over its two charts.'''
        return [{'curve': repr(c),
                 'mismatch': max(p.mismatch() for p in self.pieces if p.index == k)}
                for k, c in enumerate(self.curves)]

    def check_collars(self, tol):
        '''Collar diagnostics with ``tol`` attached.

        Raises:
            :class:`slaglab.exceptions.CollarMismatchError` when a collar
            mismatch exceeds ``tol``; the diagnostics travel with the exception.
        '''
        collars = self.collar_mismatch()
        for c in collars:
            c['tolerance'] = tol
        bad = [c for c in collars if not c['mismatch'] <= tol]
        if bad:
            raise CollarMismatchError("%d of %d collars mismatch above %g"
                                      % (len(bad), len(collars), tol), collars)
        return collars

    def divisor(self):
        '''Residuals where the pieces meet the exceptional divisor u = 0.

        ``circle`` is max(|p|, |Im q|): zero when the piece sits on the real
        circle of the divisor.  ``omega_raw_sup`` is the pulled-back Kähler
        form there, in the raw parameter basis.
        '''
        circle = omega = 0.0
        for piece in self.pieces:
            ts = piece.divisor_samples()
            zs = piece.evaluate_many(ts)
            i, j = piece.potential.slots
            circle = max(circle, float(np.max(np.abs(zs[:, i]))), float(np.max(np.abs(zs[:, j].imag))))
            H, _, _ = geom.hermitian_pullback(piece.potential, piece, ts)
            omega = max(omega, float(np.max(np.abs(H.imag))))
        return {'circle': circle, 'omega_raw_sup': omega}

    def _energy(self, immersion, potential, volume_form):
        ts = immersion.sample_grid()
        H, zs, jac = geom.hermitian_pullback(potential, immersion, ts)
        M = -H.imag
        v = self.phase.unit * volume_form.coefficient_many(zs) * np.linalg.det(jac)
        return ts, np.sum(M * M, axis=(-2, -1)) + v.imag ** 2

    def defect(self):
        '''Defect reports of the punctured fiber and of every chart piece, with the energy split.'''
        outer = geom.slag_defect(self.ambient, self.volume_form, self.outer, self.phase)
        inner = [geom.slag_defect(p.potential, p.volume_form, p, self.phase) for p in self.pieces]
        _, e_out = self._energy(self.outer, self.ambient, self.volume_form)
        energy = self.outer.box.cell_volume(self.outer.points_per_axis) * float(np.sum(e_out))
        collar = 0.0
        for p in self.pieces:
            ts, e = self._energy(p, p.potential, p.volume_form)
            w = p.box.cell_volume(p.points_per_axis)
            energy += w * float(np.sum(e))
            collar += w * float(np.sum(e[ts[:, 0] >= self.inner_radius ** 2]))
        max_defect = max([outer.max_defect] + [r.max_defect for r in inner])
        return outer, inner, energy, collar, max_defect


def build_surgered_torus(beta_hat, a, radii=(0.12, 0.18), orbifold=None, neck=None,
                         points_per_axis=8, tol=1e-3):
    '''Assembles the surgered torus and measures it; makes no convergence claim.

    Raises:
        :class:`slaglab.exceptions.CollarMismatchError` when a collar mismatch
        exceeds ``tol``.
    '''
    orbifold = orbifold or _orbifold.default_orbifold()
    surgered = SurgeredTorus(orbifold, beta_hat, a, radii, neck, points_per_axis)
    collars = surgered.check_collars(tol)
    divisor = surgered.divisor()
    outer, inner, energy, collar, max_defect = surgered.defect()
    logger.debug("surgered torus %r: energy %.3e (collars %.3e), divisor residual %.1e",
                 surgered, energy, collar, divisor['circle'])
    return surgered, SurgeryReport(collars, divisor, outer, inner, energy, collar, max_defect)
