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

'''Candidate special Lagrangian planes and their blowup closures.

Two families live here:

* L⁰_bc ⊂ ℂ², the plane u₁ + iu₂ = (b + ic)(v₂ + iv₁) with z_j = u_j + iv_j,
  whose closure in the blowup of ℂ²/ℤ₂ meets the exceptional ℂP¹ in a
  generalized circle of the q = z₂/z₁ chart;
* L⁰_A ⊂ ℂⁿ, the graph x = Ay, Lagrangian iff A is symmetric, special
  with phase θ iff Im(e^{iθ} det(I + iA)) = 0.

Divisor circles are handled through their generalized-circle
coefficients (A, B₁, B₂, C) meaning A|q|² + B₁q₁ + B₂q₂ + C = 0; points of
ℂP¹ are normalized homogeneous pairs [x : y] with q = y/x, which keeps the
point at infinity in reach without a second chart.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['MAX_MINOR_DIM',
           'CurveInCP', 'PhaseCondition', 'BlowupResidual', 'SmoothnessReport',
           'LimitPlaneReport',
           'calabi_lagrangian_check', 'circle_intersections', 'cp1_samples',
           'graph_projector', 'la_blowup_equations', 'la_chart_point',
           'la_divisor_points', 'la_immersion', 'la_printed_reduction',
           'la_smoothness_probe', 'la_special_condition',
           'la_special_condition_crosscheck', 'la_symmetry_test', 'lbc_coverage',
           'lbc_cp1_circle', 'lbc_divisor_trace', 'lbc_du_reality', 'lbc_immersion',
           'lbc_ray_phase_check', 'lbc_topology_probe', 'limit_plane',
           'limit_plane_sequence', 'minor_sum_identity']


import collections
import itertools

import numpy as np

from . import logger
from .exceptions import PreconditionError, SizeError
from . import canonical
from . import geom
from . import util


#: int: Largest matrix size for the exhaustive principal-minor expansion.
MAX_MINOR_DIM = 12


# -- L⁰_bc -------------------------------------------------------------------

def lbc_immersion(b, c, box=None, points_per_axis=8):
    '''(v₁, v₂) ↦ ((bv₂ − cv₁) + iv₁, (cv₂ + bv₁) + iv₂).

    The Jacobian is S + iI with S = [[−c, b], [b, c]] symmetric.  The
    default box [−1, 1]² with an even grid never samples the origin.
    '''
    jac = np.array([[-c + 1j, b], [b, c + 1j]], dtype=complex)
    box = box or util.ParameterBox((-1.0, -1.0), (1.0, 1.0))
    return geom.AffineImmersion(np.zeros(2, dtype=complex), jac, box, points_per_axis,
                                label="L_bc(b=%g,c=%g)" % (b, c))


def lbc_du_reality(b, c, ts):
    '''Largest imaginary parts of ∂U and of ∂∂̄U pulled back to L⁰_bc.

    Returns:
        (float, float): max |Im ι*∂U| over ``ts`` and max |Im(JᵀJ̄)|.
    '''
    imm = lbc_immersion(b, c)
    ts = np.atleast_2d(ts)
    zs = imm.evaluate_many(ts)
    jac = imm.matrix
    du = np.conj(zs) @ jac
    ddbar = jac.T @ jac.conj()
    return float(np.max(np.abs(du.imag))), float(np.max(np.abs(ddbar.imag)))


class CurveInCP:
    '''A generalized circle A|q|² + B₁q₁ + B₂q₂ + C = 0 in ℂP¹.

    ``kind`` is 'circle', 'line', 'empty' or 'plane' (all coefficients
    zero).  Lines pass through the point at infinity.
    '''

    __slots__ = ('coefficients', 'kind', 'center', 'radius', 'form')

    def __init__(self, coefficients, form='derived'):
        A, B1, B2, C = (float(x) for x in coefficients)
        self.coefficients = (A, B1, B2, C)
        self.form = form
        self.center = None
        self.radius = None
        if A != 0:
            self.center = complex(-B1 / (2 * A), -B2 / (2 * A))
            r2 = (B1 * B1 + B2 * B2) / (4 * A * A) - C / A
            if r2 < 0:
                self.kind = 'empty'
            else:
                self.kind = 'circle'
                self.radius = float(np.sqrt(r2))
        elif B1 == 0 and B2 == 0:
            self.kind = 'plane' if C == 0 else 'empty'
        else:
            self.kind = 'line'

    def __repr__(self):
        if self.kind == 'circle':
            return "<%s %s circle center=%s radius=%.6g>" % (self.__class__.__name__, self.form,
                                                            self.center, self.radius)
        return "<%s %s %s coefficients=%s>" % (self.__class__.__name__, self.form, self.kind,
                                               self.coefficients)

    def inverted(self):
        '''The same curve in the chart w = 1/q.'''
        A, B1, B2, C = self.coefficients
        return CurveInCP((C, B1, -B2, A), self.form)

    def residual(self, hom):
        '''Equation residual at normalized homogeneous points [x : y], shape (m, 2).'''
        hom = np.atleast_2d(np.asarray(hom, dtype=complex))
        x, y = hom[:, 0], hom[:, 1]
        A, B1, B2, C = self.coefficients
        yx = y * np.conj(x)
        return A * np.abs(y) ** 2 + B1 * yx.real + B2 * yx.imag + C * np.abs(x) ** 2

    def chart_distance(self, q):
        '''Euclidean distance from chart points q to the curve in this chart.'''
        q = np.asarray(q, dtype=complex)
        A, B1, B2, C = self.coefficients
        if self.kind == 'circle':
            return np.abs(np.abs(q - self.center) - self.radius)
        if self.kind == 'line':
            return np.abs(B1 * q.real + B2 * q.imag + C) / np.hypot(B1, B2)
        if self.kind == 'plane':
            return np.zeros(q.shape)
        return np.full(q.shape, np.inf)

    def distance(self, hom):
        '''Distance in the q chart when |q| ≤ 1, in the w = 1/q chart otherwise.'''
        hom = np.atleast_2d(np.asarray(hom, dtype=complex))
        x, y = hom[:, 0], hom[:, 1]
        in_q = np.abs(y) <= np.abs(x)
        out = np.empty(hom.shape[0])
        if np.any(in_q):
            out[in_q] = self.chart_distance(y[in_q] / x[in_q])
        if np.any(~in_q):
            out[~in_q] = self.inverted().chart_distance(x[~in_q] / y[~in_q])
        return out

    def to_dict(self):
        d = {'form': self.form, 'kind': self.kind, 'coefficients': list(self.coefficients)}
        if self.kind == 'circle':
            d.update(center=[self.center.real, self.center.imag], radius=self.radius)
        return d


def lbc_cp1_circle(b, c, form='derived'):
    '''The intersection of the closure of L⁰_bc with the exceptional ℂP¹.

    ``form='derived'`` gives b|q|² − 2c·q₁ + (b² + c² − 1)q₂ − b = 0, which
    the traced divisor points satisfy.  ``form='printed'`` gives the
    variant with −2b·q₁ for comparison; the two agree when b = c.
    '''
    if form == 'derived':
        return CurveInCP((b, -2.0 * c, b * b + c * c - 1.0, -b), form)
    if form == 'printed':
        return CurveInCP((b, -2.0 * b, b * b + c * c - 1.0, -b), form)
    raise ValueError("form must be 'derived' or 'printed'")


def _normalize_hom(x, y):
    norm = np.sqrt(np.abs(x) ** 2 + np.abs(y) ** 2)
    return np.stack([x / norm, y / norm], axis=-1)


def lbc_divisor_trace(b, c, samples=200):
    '''Divisor points [z₁ : z₂] of the rays of L⁰_bc, one per direction in [0, π).'''
    t = np.pi * np.arange(samples) / samples
    v = np.stack([np.cos(t), np.sin(t)], axis=-1)
    z = v @ lbc_immersion(b, c).matrix.T
    return _normalize_hom(z[:, 0], z[:, 1])


def lbc_ray_phase_check(b, c, samples=200, tol=1e-8):
    '''Checks p/|p| = D̄²/|D|² with D = (bq₁ − c) + i(bq₂ − 1) along L⁰_bc.

    Returns:
        dict with the largest discrepancy, the largest violation of the
        bound |(bq₁−c)² − (bq₂−1)²| ≤ (bq₁−c)² + (bq₂−1)², and the number
        of samples used (directions with D ≈ 0 or z₁ ≈ 0 are skipped).
    '''
    t = np.pi * (np.arange(samples) + 0.5) / samples
    v = np.stack([np.cos(t), np.sin(t)], axis=-1)
    z = v @ lbc_immersion(b, c).matrix.T
    keep = np.abs(z[:, 0]) > tol
    z = z[keep]
    p = z[:, 0] ** 2
    q = z[:, 1] / z[:, 0]
    D = (b * q.real - c) + 1j * (b * q.imag - 1.0)
    keep = np.abs(D) > tol
    p, D = p[keep], D[keep]
    gap = np.abs(p / np.abs(p) - np.conj(D) ** 2 / np.abs(D) ** 2)
    re, im = D.real ** 2, D.imag ** 2
    bound = np.abs(re - im) - (re + im)
    return {'max_discrepancy': float(gap.max()) if gap.size else 0.0,
            'max_bound_violation': float(max(bound.max(), 0.0)) if bound.size else 0.0,
            'samples': int(gap.size)}


def _chordal(h1, h2):
    return np.abs(h1[:, 0] * h2[:, 1] - h1[:, 1] * h2[:, 0])


def lbc_topology_probe(b, c, R=4.0, samples=400, max_step=0.1):
    '''Sampling certificate for the divisor trace of L_bc.

    Walks the divisor loop direction by direction, measuring chordal steps
    on ℂP¹, and counts the arcs that stay inside |q| ≤ R.

    Returns:
        dict with 'kind', 'divisor_components', 'arcs_in_disc', 'connected',
        'max_step', 'max_residual' and 'inconclusive'.
    '''
    if not R > 0:
        raise PreconditionError("sampling radius must be positive")
    hom = lbc_divisor_trace(b, c, samples)
    loop = np.concatenate([hom, hom[:1]], axis=0)
    steps = _chordal(loop[:-1], loop[1:])
    curve = lbc_cp1_circle(b, c)
    inside = np.abs(hom[:, 1]) <= R * np.abs(hom[:, 0])
    arcs = 0
    if inside.all():
        arcs = 1
    elif inside.any():
        arcs = int(np.sum(inside & ~np.roll(inside, 1)))
    inconclusive = bool(steps.max() > max_step)
    return {'kind': curve.kind,
            'divisor_components': 1,
            'arcs_in_disc': arcs,
            'connected': not inconclusive,
            'max_step': float(steps.max()),
            'max_residual': float(np.max(np.abs(curve.residual(hom)))),
            'inconclusive': inconclusive}


def cp1_samples(count, rng):
    '''Points spread uniformly over ℂP¹ = S², as normalized [x : y].'''
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # inverse stereographic: north pole ↦ q = ∞
    x = np.sqrt(0.5 * (1.0 - v[:, 2])) + 0j
    y = (v[:, 0] + 1j * v[:, 1]) / (2.0 * np.maximum(x.real, 1e-300))
    at_pole = x.real < 1e-150
    y[at_pole] = 1.0
    x[at_pole] = 0.0
    return _normalize_hom(x, y)


def circle_intersections(first, second):
    '''Common chart points of two generalized circles (at most two).'''
    A1, B11, B12, C1 = first.coefficients
    A2, B21, B22, C2 = second.coefficients
    # radical line: subtract scaled equations to drop |q|²
    if A1 != 0:
        l1, l2, l0 = A1 * B21 - A2 * B11, A1 * B22 - A2 * B12, A1 * C2 - A2 * C1
        base = first
    elif A2 != 0:
        return circle_intersections(second, first)
    else:
        M = np.array([[B11, B12], [B21, B22]])
        if abs(np.linalg.det(M)) < 1e-14:
            return []
        sol = np.linalg.solve(M, [-C1, -C2])
        return [complex(sol[0], sol[1])]
    norm = np.hypot(l1, l2)
    if norm < 1e-14:
        return []
    A, B1, B2, C = base.coefficients
    # parametrize the line l1 q1 + l2 q2 + l0 = 0 and solve the quadratic
    p0 = complex(-l0 * l1 / norm ** 2, -l0 * l2 / norm ** 2)
    d = complex(-l2 / norm, l1 / norm)
    qa = A
    qb = 2 * A * (p0 * d.conjugate()).real + B1 * d.real + B2 * d.imag
    qc = A * abs(p0) ** 2 + B1 * p0.real + B2 * p0.imag + C
    disc = qb * qb - 4 * qa * qc
    if disc < -1e-14:
        return []
    root = np.sqrt(max(disc, 0.0))
    return sorted({complex(np.round(p0 + s * d, 14)) for s in ((-qb - root) / (2 * qa),
                                                             (-qb + root) / (2 * qa))},
                  key=lambda q: (q.real, q.imag))


def lbc_coverage(b_grid, samples=1000, rng=None, tol=5e-3, witness=(1.0, 0.5)):
    '''Numerical coverage certificate for the c = 0 circles over ℂP¹.

    Args:
        b_grid: values of b (c = 0).
        samples (int): random points of ℂP¹; q = 0 and q = ∞ are added.
        rng: numpy Generator.
        tol (float): coverage tolerance.
        witness: two b values whose circles are intersected to show the
            family is not a fibration.

    Returns:
        dict with 'max_distance', 'covered', 'worst_point', 'witness' and
        'origin_cover' (the b values that cover q = 0).
    '''
    b_grid = np.asarray(b_grid, dtype=float)
    if b_grid.size == 0:
        raise PreconditionError("coverage needs a non-empty b grid")
    rng = rng if rng is not None else util.make_rng(0)
    hom = np.concatenate([cp1_samples(samples, rng),
                          np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)], axis=0)
    best = np.full(hom.shape[0], np.inf)
    for b in b_grid:
        best = np.minimum(best, lbc_cp1_circle(b, 0.0).distance(hom))
    worst = int(np.argmax(best))
    origin_cover = [float(b) for b in b_grid
                    if abs(lbc_cp1_circle(b, 0.0).residual([[1.0, 0.0]])[0]) < 1e-12]
    if origin_cover:
        logger.debug("q = 0 lies on the c = 0 divisor curves for b in %s", origin_cover)
    first, second = (lbc_cp1_circle(b, 0.0) for b in witness)
    points = circle_intersections(first, second)
    hom_points = [[1.0, q] for q in points]
    residuals = [float(max(abs(first.residual(h)[0]), abs(second.residual(h)[0])))
                 for h in hom_points]
    return {'max_distance': float(best[worst]),
            'covered': bool(best[worst] < tol),
            'worst_point': [float(hom[worst, 1].real), float(hom[worst, 1].imag),
                            float(abs(hom[worst, 0]))],
            'witness': {'b': [float(b) for b in witness],
                        'points': [[q.real, q.imag] for q in points],
                        'max_residual': max(residuals) if residuals else None},
            'origin_cover': origin_cover,
            'samples': int(hom.shape[0])}


# -- L⁰_A --------------------------------------------------------------------

def la_immersion(A, box=None, points_per_axis=4):
    '''y ↦ (A + iI)y, the graph x = Ay.'''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    box = box or util.ParameterBox.cube(n, -1.0, 1.0)
    return geom.AffineImmersion(np.zeros(n, dtype=complex), A + 1j * np.eye(n), box,
                                points_per_axis, label="L_A(n=%d)" % n)


def la_symmetry_test(A, tol=1e-10, points_per_axis=3):
    '''Flat ω-pullback on L⁰_A: (sup of the 2-form norm, defect < tol).

    The matrix of ι*ω is Aᵀ − A, so the norm is ‖A − Aᵀ‖_F/√2.
    '''
    A = np.asarray(A, dtype=float)
    imm = la_immersion(A, points_per_axis=points_per_axis)
    ts = imm.sample_grid()
    H, _, _ = geom.hermitian_pullback(geom.FlatPotential(A.shape[0]), imm, ts)
    M = -H.imag
    defect = float(np.max(geom.two_form_norm(0.5 * (M - np.swapaxes(M, -1, -2)))))
    return defect, defect < tol


class PhaseCondition(collections.namedtuple(
        'PhaseCondition', 'even_sum odd_sum determinant theta raw_even_sum raw_odd_sum')):
    '''Principal-minor sums of a matrix A.

    even_sum + i·odd_sum equals det(I + iA); ``theta`` is the phase that
    makes e^{iθ}det(I + iA) real.  The raw sums drop the i^k weights.
    '''
    __slots__ = ()


def minor_sum_identity(A):
    '''Expands det(I + iA) = Σ_k i^k Σ_{|S|=k} det(A_S).

    Raises:
        :class:`slaglab.exceptions.SizeError` for n > 12.
    '''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise PreconditionError("A must be square")
    if n > MAX_MINOR_DIM:
        raise SizeError("principal-minor expansion limited to n <= %d, got %d" % (MAX_MINOR_DIM, n))
    even = odd = raw_even = raw_odd = 0.0
    for k in range(n + 1):
        total = 1.0 if k == 0 else sum(float(np.linalg.det(A[np.ix_(S, S)]))
                                       for S in itertools.combinations(range(n), k))
        if k % 2 == 0:
            even += (-1) ** (k // 2) * total
            raw_even += total
        else:
            odd += (-1) ** ((k - 1) // 2) * total
            raw_odd += total
    det = complex(np.linalg.det(np.eye(n) + 1j * A))
    value = complex(even, odd)
    theta = util.Phase.fit(value) if value != 0 else util.Phase(0.0)
    return PhaseCondition(even, odd, det, theta, raw_even, raw_odd)


def _check_symmetric(A, tol=1e-12):
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A - A.T)) > tol * max(1.0, float(np.max(np.abs(A)))):
        raise PreconditionError("A must be symmetric")
    return A


def la_special_condition(A, theta):
    '''Im(e^{iθ} det(I + iA)); zero iff L_A is special Lagrangian with phase θ.

    Raises:
        :class:`slaglab.exceptions.PreconditionError` for non-symmetric A.
    '''
    A = _check_symmetric(A)
    theta = theta.radians if isinstance(theta, util.Phase) else float(theta)
    det = np.linalg.det(np.eye(A.shape[0]) + 1j * A)
    return float((np.exp(1j * theta) * det).imag)


def la_special_condition_crosscheck(A, theta):
    '''The same residual from the pulled back volume form.

    ι*(dz₁∧…∧dz_n) = det(A + iI) = iⁿ·conj(det(I + iA)), hence the
    residual equals −Im(e^{−i(θ + nπ/2)}·det(A + iI)).
    '''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    theta = theta.radians if isinstance(theta, util.Phase) else float(theta)
    imm = la_immersion(A)
    vol = geom.pullback_volume_form(geom.HolomorphicVolumeForm.standard(n), imm, imm.box.centroid)
    return float(-(np.exp(-1j * (theta + n * np.pi / 2)) * vol).imag)


class BlowupResidual(collections.namedtuple('BlowupResidual', 'first rows divisor singular')):
    '''Residuals of the blowup equations of L_A at one chart point.

    ``first`` is (1 − Σa₁ⱼvⱼ)x₁ − (a₁₁ + Σa₁ⱼuⱼ)y₁; ``rows[i]`` is
    (uᵢ − Σaᵢⱼvⱼ)x₁ − (aᵢ₁ + vᵢ + Σaᵢⱼuⱼ)y₁; ``divisor[i]`` is the ratio
    equation obtained by dividing the two.  ``singular`` flags points
    where both coefficients of the first equation vanish.
    '''
    __slots__ = ()

    @property
    def max_abs(self):
        '''float: Largest residual.'''
        return float(max(abs(self.first), np.max(np.abs(self.rows), initial=0.0),
                         np.max(np.abs(self.divisor), initial=0.0)))


def _blowup_terms(A, w):
    u, v = w.real, w.imag
    a1 = A[0, 1:]
    sub = A[1:, 1:]
    P = 1.0 - a1 @ v
    Q = A[0, 0] + a1 @ u
    R = A[1:, 0] + v + sub @ u
    S = u - sub @ v
    return P, Q, R, S


def la_blowup_equations(A, chart_point, singular_tol=1e-12):
    '''Evaluates the blowup equations of L_A at (z₁, w₂, …, w_n).

    Chart coordinates are z_j = z₁w_j (j ≥ 2), z₁ = x₁ + iy₁, w_j = u_j + iv_j.
    '''
    A = np.asarray(A, dtype=float)
    point = np.asarray(chart_point, dtype=complex)
    if point.shape != (A.shape[0],):
        raise PreconditionError("chart point must have %d coordinates" % A.shape[0])
    x1, y1 = point[0].real, point[0].imag
    P, Q, R, S = _blowup_terms(A, point[1:])
    singular = abs(P) < singular_tol and abs(Q) < singular_tol
    return BlowupResidual(float(P * x1 - Q * y1), S * x1 - R * y1, R * P - Q * S, singular)


def la_printed_reduction(chart_point):
    '''(u₂ + v₂, u₃ + v₃): the printed divisor equations for A = diag(1, 1, 0).'''
    w = np.asarray(chart_point, dtype=complex)
    return np.array([w[1].real + w[1].imag, w[2].real + w[2].imag])


def la_chart_point(A, y):
    '''Blowup chart coordinates (z₁, z₂/z₁, …) of the L⁰_A point with imaginary part y.'''
    A = np.asarray(A, dtype=float)
    z = (A + 1j * np.eye(A.shape[0])) @ np.asarray(y, dtype=float)
    if z[0] == 0:
        raise PreconditionError("point lies outside the z1 != 0 chart")
    return np.concatenate([[z[0]], z[1:] / z[0]])


def la_divisor_points(A, samples, rng):
    '''Divisor chart points (0, w₂, …, w_n) of random rays of L⁰_A.'''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    out = []
    while len(out) < samples:
        y = rng.normal(size=n)
        z = (A + 1j * np.eye(n)) @ y
        if abs(z[0]) < 1e-6 * np.linalg.norm(z):
            continue
        out.append(np.concatenate([[0.0], z[1:] / z[0]]))
    return np.array(out, dtype=complex)


class SmoothnessReport(collections.namedtuple(
        'SmoothnessReport', 'min_singular_value min_raw_singular_value max_residual '
        'samples non_smooth singular_samples')):
    '''Rank certificate of the divisor equations over sampled divisor points.'''
    __slots__ = ()

    @property
    def passed(self):
        '''bool: True when no sample fell below the threshold.'''
        return not self.non_smooth


def la_smoothness_probe(A, samples=100, rng=None, threshold=0.1):
    '''Smallest singular value of the (row-normalized) divisor Jacobian.

    The n − 1 equations R_iP − QS_i = 0 are differentiated in the real
    chart coordinates (u₂…u_n, v₂…v_n).  Samples below ``threshold`` are
    listed in the report rather than raised.
    '''
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n < 2:
        raise PreconditionError("divisor equations need n >= 2")
    rng = rng if rng is not None else util.make_rng(0)
    pts = la_divisor_points(A, samples, rng)
    a1 = A[0, 1:]
    sub = A[1:, 1:]
    eye = np.eye(n - 1)
    min_sv = min_raw = np.inf
    max_res = 0.0
    non_smooth, singular = [], []
    for idx, w in enumerate(pts):
        res = la_blowup_equations(A, w)
        if res.singular:
            singular.append(idx)
            continue
        max_res = max(max_res, float(np.max(np.abs(res.divisor))))
        P, Q, R, S = _blowup_terms(A, w[1:])
        du = sub * P - np.outer(S, a1) - Q * eye
        dv = eye * P - np.outer(R, a1) + Q * sub
        jac = np.concatenate([du, dv], axis=1)
        raw = np.linalg.svd(jac, compute_uv=False)[-1]
        norms = np.linalg.norm(jac, axis=1)
        if np.any(norms < 1e-14):
            sv = 0.0
        else:
            sv = np.linalg.svd(jac / norms[:, None], compute_uv=False)[-1]
        min_sv, min_raw = min(min_sv, sv), min(min_raw, raw)
        if sv < threshold:
            non_smooth.append(idx)
    return SmoothnessReport(float(min_sv), float(min_raw), max_res, int(pts.shape[0]),
                            non_smooth, singular)


def calabi_lagrangian_check(A, points_per_axis=4):
    '''Sup of the ω-pullback of L⁰_A under the Calabi metric on K_{ℂP^{n−1}}.'''
    A = np.asarray(A, dtype=float)
    imm = la_immersion(A, points_per_axis=points_per_axis)
    H, _, _ = geom.hermitian_pullback(canonical.CalabiPotential(A.shape[0]), imm,
                                      imm.sample_grid())
    M = -H.imag
    return float(np.max(geom.two_form_norm(0.5 * (M - np.swapaxes(M, -1, -2)))))


def graph_projector(A):
    '''Orthogonal projector of ℝ²ⁿ = {(x, y)} onto the plane x = Ay.'''
    A = np.asarray(A, dtype=float)
    return _projector(np.vstack([A, np.eye(A.shape[0])]))


def _projector(basis):
    q, _ = np.linalg.qr(basis)
    return q @ q.T


def limit_plane(Q, d):
    '''Limit of L⁰_{A_k} for A_k = Q diag(k, d₂, …, d_n) Qᵀ as k → ∞.

    Spanned by (Qe₁, 0) and (d_j Qe_j, Qe_j) for j ≥ 2; returns a 2n×n basis.
    '''
    Q = np.asarray(Q, dtype=float)
    d = np.asarray(d, dtype=float)
    n = Q.shape[0]
    cols = [np.concatenate([Q[:, 0], np.zeros(n)])]
    cols += [np.concatenate([d[j - 1] * Q[:, j], Q[:, j]]) for j in range(1, n)]
    return np.stack(cols, axis=1)


class LimitPlaneReport(collections.namedtuple(
        'LimitPlaneReport', 'projector_gaps omega_defect phase_gaps')):
    '''Convergence of a degenerating sequence of symmetric graphs.'''
    __slots__ = ()

    @property
    def converges(self):
        '''bool: Projector gaps decrease along the sequence.'''
        gaps = np.asarray(self.projector_gaps)
        return bool(np.all(np.diff(gaps) < 0))


def limit_plane_sequence(Q, d, ks=(1e1, 1e2, 1e3, 1e4)):
    '''Checks that L⁰_{A_k} converges to :func:`limit_plane` and the limit is Lagrangian.

    The phase of det(I + iA_k) is compared with the limit phase of
    i·Π(1 + i d_j).
    '''
    Q = np.asarray(Q, dtype=float)
    d = np.asarray(d, dtype=float)
    n = Q.shape[0]
    basis = limit_plane(Q, d)
    target = _projector(basis)
    x, y = basis[:n], basis[n:]
    omega = x.T @ y - y.T @ x
    limit_det = 1j * np.prod(1.0 + 1j * d)
    gaps, phase_gaps = [], []
    for k in ks:
        A = Q @ np.diag(np.concatenate([[k], d])) @ Q.T
        gaps.append(float(np.linalg.norm(graph_projector(A) - target)))
        det = np.linalg.det(np.eye(n) + 1j * A)
        phase_gaps.append(util.Phase.fit(det).distance(util.Phase.fit(limit_det)))
    return LimitPlaneReport(gaps, float(np.max(np.abs(omega))), phase_gaps)
