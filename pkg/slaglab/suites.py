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

'''Verification batteries and parameter scans.

A battery is a method ``suite_<name>`` of :class:`Battery`; every check it
performs is announced on the event log and collected into a
:class:`slaglab.report.Report`.  Scans write one CSV row per grid point.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['SCAN_COLUMNS', 'SUITES',
           'Battery',
           'run_suite', 'scan']


import logging
import math
import os

import numpy as np
from tqdm import tqdm

from . import logger
from .event import EventType, event_log
from .exceptions import PreconditionError, UsageError
from . import canonical
from . import geom
from . import gluing
from . import orbifold as _orbifold
from . import perturb
from . import report
from . import slag
from . import util


#: tuple of str: Battery names accepted by :func:`run_suite`; "all" runs every one.
SUITES = ('metrics', 'orbifold', 'slag-flat', 'slag-kcp1', 'slag-la', 'gluing', 'perturb')

#: dict: Column order of every scan family.
SCAN_COLUMNS = {
    'lbc': ('b', 'c', 'kind', 'center_re', 'center_im', 'radius', 'trace_residual',
            'omega_flat', 'im_flat', 'omega_eh', 'im_eh'),
    'la': ('n', 'sample', 'symmetric', 'omega_defect', 'minor_residual', 'theta',
           'special_residual'),
    'glue-a': ('a', 'r', 'sup_defect', 'mean_defect'),
    'torus': ('alpha', 'beta', 'gamma', 'generic_distance', 'generic_rule',
              'min_distance', 'omega_sup', 'im_sup'),
}


def _progress(iterable, desc, total=None):
    return tqdm(iterable, desc=desc, total=total, leave=False,
                disable=logger.getEffectiveLevel() > logging.INFO)


def _random_matrix(rng, n, symmetric):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T) if symmetric else A


def _generic_grid(n=5):
    # (k + 1)/(n + 2) avoids 0, 1/4, 1/2 and 3/4 for n = 5
    vals = (np.arange(n) + 1.0) / (n + 2.0)
    mesh = np.meshgrid(vals, vals, vals, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=-1)


class Battery:
    '''Checks of all modules, bound to one configuration and random stream.

    Args:
        config (slaglab.config.SuiteConfig): validated configuration.
        rng (numpy.random.Generator): the run's random stream.
        events (slaglab.event.EventMessages): where checks are announced.
    '''

    def __init__(self, config, rng=None, events=event_log):
        self.config = config
        self.rng = rng if rng is not None else util.make_rng(config.suite.seed)
        self.events = events
        self.orbifold = config.orbifold.build()

    def tol(self, value):
        return value * self.config.suite.tol_scale

    def _payload(self, key, anchor, kind, details):
        if anchor == report.PLUMBING:
            kind = 'plumbing'
        elif anchor not in report.ANCHORS:
            raise UsageError("check %r has unknown anchor %r" % (key, anchor))
        return dict(details, kind=kind, anchor=anchor)

    def check(self, key, anchor, passed, value=None, threshold=None, message='', **details):
        '''Announces a verdict.  ``anchor`` is a key of :data:`slaglab.report.ANCHORS`
        for claims, :data:`slaglab.report.PLUMBING` for implementation contracts.'''
        passed = bool(passed)
        payload = dict(self._payload(key, anchor, 'claim', details), value=value, threshold=threshold)
        self.events.message(EventType.CHECK_PASSED if passed else EventType.CHECK_FAILED,
                            key, message, payload)
        return passed

    def below(self, key, anchor, value, threshold, message='', **details):
        value = float(value)
        return self.check(key, anchor, value < threshold, value, threshold, message, **details)

    def measure(self, key, anchor, value, message='', **details):
        payload = dict(self._payload(key, anchor, 'measurement', details), value=value)
        if payload['kind'] != 'measurement':
            raise UsageError("measurement %r cannot be anchored to %r" % (key, anchor))
        self.events.message(EventType.MEASURED, key, message, payload)

    def warn(self, key, message):
        self.events.message(EventType.WARNING, key, message)

    def run(self, name):
        function = getattr(self, 'suite_' + name.replace('-', '_'), None)
        if name not in SUITES or not callable(function):
            raise UsageError("unknown suite %r; expected one of %s or 'all'" % (name, ', '.join(SUITES)))
        self.events.message(EventType.SUITE_STARTED, name)
        function()
        self.events.message(EventType.SUITE_FINISHED, name)

    # -- metrics ------------------------------------------------------------

    def suite_metrics(self):
        worst = 0.0
        for n in (2, 3, 4):
            for _ in range(1000):
                z = self.rng.standard_normal(n) + 1j * self.rng.standard_normal(n)
                worst = max(worst, abs(canonical.calabi_det_check(n, z) - 1.0))
        self.below('metrics.calabi.det_one', 'calabi-ansatz', worst, self.tol(1e-10),
                   "det g = 1 for the Calabi ansatz, n = 2, 3, 4")

        zs = self.rng.standard_normal((5, 3)) + 1j * self.rng.standard_normal((5, 3))
        flat = max(abs(canonical.calabi_det_check(3, z, flat=True) - 1.0) for z in zs)
        self.below('metrics.calabi.flat_control', report.PLUMBING, flat, 1e-15)

        eh = canonical.EguchiHansonPotential(1.0, flat_dim=1)
        sup = 0.0
        for _ in _progress(range(100), 'EH Ricci'):
            w = self.rng.standard_normal(2) + 1j * self.rng.standard_normal(2)
            w *= self.rng.uniform(0.5, 2.0) / np.linalg.norm(w)
            z = np.concatenate([w, [self.rng.standard_normal() + 1j * self.rng.standard_normal()]])
            sup = max(sup, float(np.linalg.norm(geom.ricci_form(eh, z, self.config.geom.ricci_step))))
        self.below('metrics.eh.ricci_flat', 'eguchi-hanson', sup, self.tol(1e-5),
                   "sup ||Ric|| of f_1(U) + |w3|^2")

        U = np.linspace(0.1, 10.0, 100)
        c1, c2 = canonical.kcp1_omega_coefficients(U)
        _, f1, f2 = canonical.eh_value(U, 1.0)
        self.below('metrics.kcp1.coefficients', 'kcp1-form',
                   max(np.max(np.abs(c1 - f1)), np.max(np.abs(c2 - f2))), self.tol(1e-12),
                   "K_CP1 form coefficients equal the a = 1 derivatives")

        gap = 0.0
        for _ in range(20):
            z = self.rng.standard_normal(3) + 1j * self.rng.standard_normal(3)
            exact = geom.metric_from_potential(eh, z)
            fd = geom.metric_by_finite_differences(eh, z, self.config.geom.fd_step)
            gap = max(gap, float(np.max(np.abs(exact.entries - fd.entries))))
        self.below('metrics.eh.hessian_fd', report.PLUMBING, gap, self.tol(1e-5))

        self.measure('metrics.eh.discrepancy_u1', 'asymptotic-flatness',
                     {str(a): float(canonical.eh_discrepancy(1.0, a)) for a in (0.1, 0.05)},
                     "f_a(1) - 1")

    # -- orbifold -----------------------------------------------------------

    def suite_orbifold(self):
        orb = self.orbifold
        counts = [len(orb.fixed_locus(g)) for g in (orb.alpha, orb.beta, orb.alpha_beta)]
        self.check('orbifold.fixed_curve_counts', 'fixed-curves', counts == [16, 16, 0], counts,
                   [16, 16, 0], "fixed curves of alpha, beta and alpha beta")
        classes = orb.singular_set()
        self.check('orbifold.singular_classes', 'fixed-curves', len(classes) == 16, len(classes), 16,
                   "images of the 32 upstairs curves in M0")
        sep = orb.min_pairwise_distance()
        self.check('orbifold.curves_disjoint', 'fixed-curves', sep > 0, sep, 0.0,
                   "smallest distance between two fixed curves")

        z = self.rng.standard_normal((50, 3)) + 1j * self.rng.standard_normal((50, 3))
        self.check('orbifold.involutions', report.PLUMBING,
                   all(orb.is_involution(g, z) for g in orb.group[1:]))

        axis = np.union1d(np.arange(50) / 50.0, [0.0, 0.25, 0.5, 0.75])
        mesh = np.meshgrid(axis, axis, axis, indexing='ij')
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        by_distance = ~np.any(orb.fiber_distances(pts) < orb.intersect_tol, axis=1)
        by_rule = orb.genericity_rule(pts)
        mismatch = int(np.sum(by_distance != by_rule))
        self.check('orbifold.genericity_rule', 'torus-fibers', mismatch == 0, mismatch, 0,
                   "closed-form rule against distances on a %d^3 grid" % axis.size,
                   non_generic=int(np.sum(~by_rule)))

        worst = 0.0
        for p in _generic_grid():
            fiber = orb.torus_fiber(*p)
            worst = max(worst, float(np.max(np.abs(_orbifold.cohomology_pullback(
                fiber, fiber.box.centroid)))))
        self.below('orbifold.cohomology_pullback', 'fiber-cohomology', worst, self.tol(1e-15),
                   "dx_j^dy_j pull back to zero on torus fibers")

        sym = {}
        for n in (2, 3, 4):
            sym[n] = _orbifold.volume_form_in_blowup_chart(n)
        self.check('orbifold.blowup.volume_symbolic', 'blowup-volume',
                   all(abs(sym[n] - 1.0 / n) < 1e-14 for n in sym), sym, "1/n",
                   "sympy chart volume coefficient for n = 2, 3, 4")
        spread = 0.0
        for n in (2, 3, 4):
            for r in (1.0, 1e-2, 1e-4, 1e-6):
                w = np.concatenate([[r * np.exp(0.3j)], self.rng.standard_normal(n - 1)])
                spread = max(spread, abs(_orbifold.volume_form_in_blowup_chart_numeric(n, w) - 1.0 / n) * n)
        self.below('orbifold.blowup.volume_numeric', 'blowup-volume', spread, self.tol(1e-8),
                   "chart volume coefficient constant down to |w1| = 1e-6")

        missed = 0
        for n in (2, 3):
            chart = _orbifold.BlowupChart(n)
            for _ in range(50):
                z = self.rng.standard_normal(n) + 1j * self.rng.standard_normal(n)
                back = _orbifold.blowup_roundtrip(chart, z)
                missed += util.root_of_unity_multiple(back, z, n) is None
        self.check('orbifold.blowup.roundtrip', report.PLUMBING, missed == 0, missed, 0)

    # -- slag ---------------------------------------------------------------

    def suite_slag_flat(self):
        orb = self.orbifold
        flat3 = geom.FlatPotential(3)
        vol3 = geom.HolomorphicVolumeForm.standard(3)
        worst, phase_gap = 0.0, 0.0
        for p in _progress(_generic_grid(), 'fibers'):
            rep = geom.slag_defect(flat3, vol3, orb.torus_fiber(*p))
            worst = max(worst, rep.max_defect)
            phase_gap = max(phase_gap, rep.phase.distance(-math.pi / 2))
        self.below('slag.fiber.defect', 'torus-fibers', worst, self.tol(1e-12), "flat torus fibers")
        self.below('slag.fiber.phase', 'torus-fibers', phase_gap, self.tol(1e-12),
                   "fitted theta = -pi/2 mod pi")

        flat2 = geom.FlatPotential(2)
        vol2 = geom.HolomorphicVolumeForm.standard(2)
        worst = trace = 0.0
        grid = np.linspace(-1.0, 1.0, 21)
        for b in _progress(grid, 'L_bc'):
            for c in grid:
                imm = slag.lbc_immersion(b, c, points_per_axis=self.config.slag.grid)
                worst = max(worst, geom.slag_defect(flat2, vol2, imm).max_defect)
                hom = slag.lbc_divisor_trace(b, c)
                trace = max(trace, float(np.max(np.abs(slag.lbc_cp1_circle(b, c).residual(hom)))))
        self.below('slag.lbc.defect_flat', 'lbc-family', worst, self.tol(1e-9), "21x21 (b, c) grid")
        self.below('slag.lbc.divisor_residual', 'lbc-divisor-circle', trace, self.tol(1e-12),
                   "traced divisor points lie on the derived circle")

        derived = slag.lbc_cp1_circle(1.0, 0.0)
        printed = slag.lbc_cp1_circle(1.0, 0.0, form='printed')
        self.check('slag.lbc.unit_circle', 'lbc-divisor-circle',
                   derived.kind == 'circle' and abs(derived.center) < 1e-15
                   and abs(derived.radius - 1.0) < 1e-15, derived.to_dict(),
                   message="b = 1, c = 0 divisor curve")
        self.check('slag.lbc.printed_circle', report.PLUMBING, printed.kind == 'circle'
                   and abs(printed.center - 1.0) < 1e-15 and abs(printed.radius - math.sqrt(2)) < 1e-15,
                   printed.to_dict(), message="printed equation gives center (1, 0), radius sqrt 2")
        hom = slag.lbc_divisor_trace(1.0, 0.0)
        self.measure('slag.lbc.printed_residual', 'lbc-divisor-circle',
                     float(np.max(np.abs(printed.residual(hom)))),
                     "printed equation on traced divisor points")

        ray = slag.lbc_ray_phase_check(0.4, -0.3)
        self.below('slag.lbc.ray_phase', 'lbc-family', ray['max_discrepancy'], self.tol(1e-8),
                   "phase of the volume form along a ray of L_bc", **ray)

        cfg = self.config.slag
        cover = slag.lbc_coverage(np.linspace(-1.0, 1.0, cfg.coverage_b_points), cfg.coverage_samples,
                                  self.rng, self.tol(cfg.coverage_tol))
        self.check('slag.lbc.coverage', 'lbc-coverage', cover['covered'], cover['max_distance'],
                   self.tol(cfg.coverage_tol), "random points of K_CP1 lie on some L_bc", **cover)
        witness = cover['witness']
        self.check('slag.lbc.coverage_witness', 'lbc-coverage', len(witness['points']) == 2
                   and witness['max_residual'] < self.tol(1e-12), witness['points'],
                   message="two c = 0 circles meet, so the family is not a fibration")

        topo = [slag.lbc_topology_probe(b, c) for b, c in ((1.0, 0.0), (0.5, 0.5), (0.0, 2.0))]
        self.check('slag.lbc.topology', 'lbc-divisor-circle',
                   all(t['connected'] and not t['inconclusive'] for t in topo),
                   [t['kind'] for t in topo], message="divisor trace is one connected loop",
                   probes=topo)

        imm = slag.lbc_immersion(0.3, 0.7)
        L = np.array([[2.0, 0.5], [-0.3, 1.0]])
        re = geom.ReparametrizedImmersion(imm, L, [0.1, -0.2], util.ParameterBox((-0.3, -0.3), (0.3, 0.3)))
        skew = geom.AffineImmersion(np.zeros(2), imm.matrix + np.array([[0.0, 0.2], [0.0, 0.0]]),
                                    imm.box, 4)
        self.below('slag.reparametrization', report.PLUMBING,
                   geom.slag_defect(flat2, vol2, re).max_defect, self.tol(1e-12))
        self.measure('slag.lbc.perturbed_defect', 'lbc-family',
                     geom.slag_defect(flat2, vol2, skew).to_dict(),
                     "a non-symmetric perturbation of L_bc is not Lagrangian")

    def suite_slag_kcp1(self):
        eh = canonical.EguchiHansonPotential(1.0)
        vol2 = geom.HolomorphicVolumeForm.standard(2)
        grid = np.linspace(-1.0, 1.0, 21)
        worst = reality = 0.0
        for b in _progress(grid, 'L_bc (EH)'):
            for c in grid:
                imm = slag.lbc_immersion(b, c, points_per_axis=self.config.slag.grid)
                worst = max(worst, geom.slag_defect(eh, vol2, imm).max_defect)
                reality = max(reality, *slag.lbc_du_reality(b, c, imm.sample_grid()))
        self.below('slag.lbc.defect_eh', 'lbc-family', worst, self.tol(1e-9), "a = 1 metric on K_CP1")
        self.below('slag.lbc.du_real', 'lbc-family', reality, self.tol(1e-12),
                   "dU and ddbar U pull back to real forms")

        worst = 0.0
        for n in (2, 3, 4):
            for _ in range(10):
                worst = max(worst, slag.calabi_lagrangian_check(_random_matrix(self.rng, n, True)))
        self.below('slag.la.calabi_lagrangian', 'la-family', worst, self.tol(1e-10),
                   "symmetric graphs are Lagrangian for the Calabi metric")

    def suite_slag_la(self):
        count = 10 * self.config.slag.random_matrices
        agree = True
        worst_sym = 0.0
        for k in _progress(range(count), 'symmetry', count):
            n = 2 + k % 3
            symmetric = k % 2 == 0
            A = _random_matrix(self.rng, n, symmetric)
            defect, lagrangian = slag.la_symmetry_test(A)
            agree &= lagrangian == bool(np.max(np.abs(A - A.T)) < 1e-12)
            if symmetric:
                worst_sym = max(worst_sym, defect)
        self.check('slag.la.symmetry_criterion', 'la-family', agree, worst_sym, 1e-10,
                   "omega-defect < 1e-10 iff A is symmetric", matrices=count)
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        self.below('slag.la.symmetry_example', report.PLUMBING,
                   abs(slag.la_symmetry_test(A)[0] - 1.0), 1e-15)

        minor = phase = cross = 0.0
        for k in _progress(range(count), 'minor sums', count):
            n = 1 + k % 6
            A = _random_matrix(self.rng, n, True)
            pc = slag.minor_sum_identity(A)
            scale = max(1.0, abs(pc.determinant))
            minor = max(minor, abs(complex(pc.even_sum, pc.odd_sum) - pc.determinant) / scale)
            phase = max(phase, abs(slag.la_special_condition(A, pc.theta)) / scale)
            cross = max(cross, abs(slag.la_special_condition(A, 0.3)
                                   - slag.la_special_condition_crosscheck(A, 0.3)) / scale)
        self.below('slag.la.minor_sum', 'la-phase', minor, self.tol(1e-11),
                   "det(I + iA) equals the alternating sums of principal minors", matrices=count)
        self.below('slag.la.phase_residual', 'la-phase', phase, self.tol(1e-12),
                   "the fitted phase makes the special condition vanish")
        self.below('slag.la.volume_crosscheck', report.PLUMBING, cross, self.tol(1e-10))
        try:
            slag.la_special_condition(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0)
            rejected = False
        except PreconditionError:
            rejected = True
        self.check('slag.la.special_needs_symmetric', report.PLUMBING, rejected)

        worst = 0.0
        for _ in range(20):
            A = _random_matrix(self.rng, 3, True)
            for _ in range(100):
                y = self.rng.standard_normal(3)
                scale = max(1.0, float(np.max(np.abs(A))))
                res = slag.la_blowup_equations(A, slag.la_chart_point(A, y))
                worst = max(worst, res.max_abs / scale ** 2)
        self.below('slag.la.blowup_equations', 'la-divisor', worst, self.tol(1e-10),
                   "forward-mapped points satisfy the chart equations")

        D = np.diag([1.0, 1.0, 0.0])
        pts = slag.la_divisor_points(D, 50, self.rng)
        derived = max(slag.la_blowup_equations(D, w).max_abs for w in pts)
        printed = max(float(np.max(np.abs(slag.la_printed_reduction(w)))) for w in pts)
        self.below('slag.la.diag_example', 'la-divisor', derived, self.tol(1e-12),
                   "diag(1,1,0): divisor is 2 v2 = 0, v3 - u3 = 0")
        self.measure('slag.la.diag_printed_reduction', 'la-divisor', printed,
                     "u2 + v2, u3 + v3 on the divisor points of diag(1,1,0)")

        reports = [slag.la_smoothness_probe(_random_matrix(self.rng, 3, True), 50, self.rng)
                   for _ in range(10)]
        self.measure('slag.la.smoothness_min_sv', 'la-divisor',
                     min(r.min_singular_value for r in reports),
                     "smallest singular value of the divisor equations", passed=[r.passed for r in reports])
        diag = slag.la_smoothness_probe(D, 50, self.rng)
        self.check('slag.la.diag_smooth', 'la-divisor', diag.passed, diag.min_singular_value, 0.1,
                   "diag(1,1,0) meets the divisor in a smooth curve")

        Q, _ = np.linalg.qr(self.rng.standard_normal((3, 3)))
        lim = slag.limit_plane_sequence(Q, [0.5, -1.0])
        self.check('slag.la.limit_plane', 'la-limits', lim.converges and lim.omega_defect < 1e-12,
                   lim.projector_gaps, message="degenerating graphs converge to a Lagrangian plane",
                   phase_gaps=lim.phase_gaps)

    # -- gluing -------------------------------------------------------------

    def suite_gluing(self):
        cfg = self.config.neck
        r0, r1 = cfg.r0, cfg.r1
        chi, d1, d2 = gluing.cutoff(np.array([r0, r1]), r0, r1, cfg.cutoff_order, derivatives=True)
        mid = float(gluing.cutoff(0.5 * (r0 + r1), r0, r1, cfg.cutoff_order))
        self.check('gluing.cutoff', report.PLUMBING, chi[0] == 0.0 and chi[1] == 1.0
                   and abs(mid - 0.5) < 1e-15 and np.max(np.abs(d1)) < 1e-14 and np.max(np.abs(d2)) < 1e-12,
                   [float(chi[0]), mid, float(chi[1])])

        pot = gluing.GluedPotential(cfg.a, r0, r1, cfg.cutoff_order)
        inner = np.linspace(0.2 * r0, r0, 20) ** 2
        outer = np.linspace(r1, 2 * r1, 20) ** 2
        gap = max(float(np.max(np.abs(x - y))) for x, y in
                  list(zip(pot.profile(inner), canonical.eh_value(inner, cfg.a)))
                  + list(zip(pot.profile(outer), (outer, np.ones_like(outer), np.zeros_like(outer)))))
        self.below('gluing.exact_branches', 'glued-metric', gap, 1e-14, "EH inside r0, flat outside r1")

        U = np.linspace(r0 ** 2, r1 ** 2, 40)[1:-1]
        h = 1e-6
        H, H1, H2 = pot.profile(U)
        Hp, H1p, _ = pot.profile(U + h)
        Hm, H1m, _ = pot.profile(U - h)
        gap = max(np.max(np.abs((Hp - Hm) / (2 * h) - H1)), np.max(np.abs((H1p - H1m) / (2 * h) - H2)))
        self.below('gluing.chain_rule', report.PLUMBING, gap, self.tol(1e-5))

        pos = gluing.glued_metric_positivity(cfg)
        self.check('gluing.positivity', 'glued-metric', pos.positive and pos.min_eigenvalue > 0.9,
                   pos.min_eigenvalue, 0.9, "smallest eigenvalue of the glued metric on the neck",
                   radius=pos.radius)
        abusive = gluing.glued_metric_positivity(cfg, a=r0)
        self.measure('gluing.positivity_large_a', 'glued-metric', abusive.min_eigenvalue, "a = r0",
                     radius=abusive.radius)

        sups = []
        for a in _progress(cfg.a_list, 'Ricci scans'):
            sc = gluing.ricci_defect_scan(cfg, a)
            sups.append(sc.annulus_sup)
            self.below('gluing.ricci_outside.a=%g' % a, 'glued-scaling', sc.outside_sup, self.tol(1e-8),
                       "Ricci defect vanishes away from the annulus")
        self.check('gluing.ricci_decreasing', 'glued-scaling', all(np.diff(sups) < 0), sups,
                   message="annulus Ricci defect decreases with a")

        probe = gluing.scaling_probe(cfg.a_list, cfg)
        self.check('gluing.scaling.potential', 'asymptotic-flatness',
                   abs(probe.potential_exponent - 2.0) <= 0.1 * self.config.suite.tol_scale,
                   probe.potential_exponent, [1.9, 2.1], "potential discrepancy scales like a^2",
                   sups=probe.potential_sups)
        self.check('gluing.scaling.ricci', 'glued-scaling', probe.ricci_exponent >= 1.5,
                   probe.ricci_exponent, 1.5, "annulus Ricci defect scales at least like a^1.5",
                   sups=probe.ricci_sups)
        self.measure('gluing.discrepancy_u1', 'asymptotic-flatness',
                     {str(a): float(abs(canonical.eh_discrepancy(1.0, a))) for a in (0.1, 0.05)})

    # -- perturb ------------------------------------------------------------

    def _deformed(self, point, modes=None, coefficients=None):
        cfg = self.config.perturb
        fiber = self.orbifold.torus_fiber(*point)
        return perturb.DeformedTorus(fiber, modes or cfg.modes, coefficients, cfg.grid, cfg.guard)

    def _atlas(self):
        return gluing.NeckAtlas(self.orbifold, self.config.perturb.neck())

    def _bump(self, torus, amplitude=0.01):
        C = np.zeros_like(torus.coefficients)
        C[0, 0, 1, 0] = amplitude
        return torus.with_coefficients(C)

    def suite_perturb(self):
        cfg = self.config.perturb
        flat = geom.FlatPotential(3)
        vol = geom.HolomorphicVolumeForm.standard(3)

        worst = max(perturb.defect_energy(self._deformed(p), flat, vol) for p in _generic_grid())
        self.below('perturb.energy.fibers', 'torus-fibers', worst, 1e-30, "zero deformation, flat metric")

        atlas = gluing.NeckAtlas(self.orbifold, cfg.neck().model_copy(update={'a': 0.02}))
        far = perturb.defect_energy(self._deformed((0.375, 0.5, 0.25)), atlas, vol)
        self.below('perturb.energy.far_from_necks', 'torus-perturbation', far, 1e-16,
                   "torus sees only the flat region")

        bumped = self._bump(self._deformed((0.3, 0.4, 0.6)))
        E = perturb.defect_energy(bumped, flat, vol)
        oracle = 0.0
        for t in bumped.sample_grid():
            M = geom.pullback_two_form(flat, bumped, t)
            v = geom.pullback_volume_form(vol, bumped, t) * util.Phase(math.pi / 2).unit
            oracle += float(np.sum(M * M)) + v.imag ** 2
        oracle *= bumped.weight
        self.check('perturb.energy.oracle', 'torus-perturbation',
                   E > 0 and abs(E - oracle) <= self.tol(1e-10) * max(1.0, oracle),
                   E, oracle, "pointwise pullbacks agree with the vectorized quadrature")

        for name, ambient, point in (('flat', flat, (0.3, 0.4, 0.6)), ('glued', self._atlas(), (0.1, 0.5, 0.1))):
            gc = perturb.gradient_check(self._deformed(point), ambient, vol, samples=3, rng=self.rng)
            self.below('perturb.gradient.%s' % name, 'torus-perturbation', gc.max_relative_error,
                       self.tol(1e-5), "defect gradient against central differences", mode=gc.mode)

        start = self._bump(self._deformed((0.3, 0.4, 0.6)))
        res = perturb.minimize_defect(start, flat, vol, tol=cfg.tol, max_iter=cfg.max_iter)
        reduction = res.history[0] / max(res.history[-1], np.finfo(float).tiny)
        monotone = bool(np.all(np.diff(res.history) <= 0))
        self.check('perturb.flat.reduction', 'torus-perturbation', reduction >= 1e3, reduction, 1e3,
                   "bumped fiber, flat metric: %s" % res.message, mode=res.mode,
                   iterations=res.iterations)
        self.below('perturb.flat.fiber_distance', 'torus-perturbation', perturb.fiber_distance(res.torus),
                   1e-4, "minimizer lands on a flat fiber")
        self.check('perturb.flat.monotone', report.PLUMBING, monotone)

        coarse = perturb.minimize_defect(self._bump(self._deformed((0.3, 0.4, 0.6), modes=2)), flat, vol,
                                         tol=cfg.tol, max_iter=cfg.max_iter)
        self.check('perturb.flat.truncation', 'torus-perturbation',
                   res.history[-1] <= max(coarse.history[-1], cfg.tol), res.history[-1],
                   coarse.history[-1], "doubling the modes does not raise the minimum")

        glued = perturb.minimize_defect(self._deformed((0.1, 0.5, 0.1)), self._atlas(), vol,
                                        tol=cfg.tol, max_iter=cfg.max_iter)
        reduction = glued.history[0] / max(glued.history[-1], np.finfo(float).tiny)
        self.check('perturb.glued.reduction', 'torus-perturbation', reduction >= 10, reduction, 10.0,
                   "fiber near a neck, glued metric: %s" % glued.message, mode=glued.mode,
                   iterations=glued.iterations, note="ambient is the glued metric, not the Ricci-flat one")
        self.check('perturb.glued.monotone', report.PLUMBING, bool(np.all(np.diff(glued.history) <= 0)))

        energies = []
        for a in (0.01, 0.005, 0.0025):
            _, rep = perturb.build_surgered_torus(0.3, a, orbifold=self.orbifold,
                                                  neck=cfg.neck().model_copy(update={'a': a}))
            self.below('perturb.surgery.collars.a=%g' % a, 'surgered-torus',
                       max(c['mismatch'] for c in rep.collars), 1e-3,
                       "chart pieces meet the lifted fiber on every collar", collars=rep.collars)
            self.below('perturb.surgery.divisor.a=%g' % a, 'surgered-torus',
                       max(rep.divisor.values()), self.tol(1e-10),
                       "chart pieces end on the real circle of the divisor, where omega pulls back to zero",
                       **rep.divisor)
            energies.append(rep.energy)
            self.measure('perturb.surgery.defect.a=%g' % a, 'surgered-torus', rep.to_dict())
        self.measure('perturb.surgery.energies', 'surgered-torus', energies, "no convergence claim is made")
        try:
            perturb.build_surgered_torus(0.25, 0.01, orbifold=self.orbifold)
            rejected = False
        except PreconditionError:
            rejected = True
        self.check('perturb.surgery.degenerate_beta', report.PLUMBING, rejected)


def run_suite(name, config, events=event_log, rng=None):
    '''Runs one battery (or "all") and returns its :class:`slaglab.report.Report`.

    Raises:
        :class:`slaglab.exceptions.UsageError` for an unknown suite name.
    '''
    names = SUITES if name == 'all' else (name,)
    for n in names:
        if n not in SUITES:
            raise UsageError("unknown suite %r; expected one of %s or 'all'" % (n, ', '.join(SUITES)))
    battery = Battery(config, rng, events)
    events.pop_all_events()
    for n in names:
        battery.run(n)
    rep = report.Report(name, config.suite.seed, config.model_dump(mode='json'))
    rep.add_events(events.pop_all_events())
    return rep


# -- scans --------------------------------------------------------------------

def _scan_lbc(config, points):
    flat = geom.FlatPotential(2)
    eh = canonical.EguchiHansonPotential(1.0)
    vol = geom.HolomorphicVolumeForm.standard(2)
    grid = np.linspace(-1.0, 1.0, points)
    for b in _progress(grid, 'scan lbc'):
        for c in (0.0,) if points > 41 else grid:
            curve = slag.lbc_cp1_circle(b, c)
            imm = slag.lbc_immersion(b, c)
            df, de = geom.slag_defect(flat, vol, imm), geom.slag_defect(eh, vol, imm)
            yield {'b': b, 'c': c, 'kind': curve.kind,
                   'center_re': None if curve.center is None else curve.center.real,
                   'center_im': None if curve.center is None else curve.center.imag,
                   'radius': curve.radius,
                   'trace_residual': float(np.max(np.abs(curve.residual(slag.lbc_divisor_trace(b, c))))),
                   'omega_flat': df.omega_sup, 'im_flat': df.im_sup,
                   'omega_eh': de.omega_sup, 'im_eh': de.im_sup}


def _scan_la(config, points):
    rng = util.make_rng(config.suite.seed)
    for n in (2, 3, 4):
        for k in range(points):
            symmetric = k % 2 == 0
            A = _random_matrix(rng, n, symmetric)
            pc = slag.minor_sum_identity(A)
            yield {'n': n, 'sample': k, 'symmetric': symmetric,
                   'omega_defect': slag.la_symmetry_test(A)[0],
                   'minor_residual': abs(complex(pc.even_sum, pc.odd_sum) - pc.determinant),
                   'theta': pc.theta.radians,
                   'special_residual': slag.la_special_condition(A, pc.theta) if symmetric else None}


def _scan_glue_a(config, points):
    radii = np.linspace(0.5 * config.neck.r0, 1.5 * config.neck.r1, points)
    for a in config.neck.a_list:
        yield from gluing.ricci_defect_scan(config.neck, a, radii).rows()


def _scan_torus(config, points):
    orb = config.orbifold.build()
    flat = geom.FlatPotential(3)
    vol = geom.HolomorphicVolumeForm.standard(3)
    axis = np.arange(points) / points
    mesh = np.meshgrid(axis, axis, axis, indexing='ij')
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    dist = orb.fiber_distances(pts)
    rule = orb.genericity_rule(pts)
    for p, d, r in zip(_progress(pts, 'scan torus'), dist, rule):
        rep = geom.slag_defect(flat, vol, orb.torus_fiber(*p, points_per_axis=3))
        yield {'alpha': p[0], 'beta': p[1], 'gamma': p[2],
               'generic_distance': bool(np.all(d >= orb.intersect_tol)), 'generic_rule': bool(r),
               'min_distance': float(d.min()), 'omega_sup': rep.omega_sup, 'im_sup': rep.im_sup}


_SCAN_DEFAULT_POINTS = {'lbc': 21, 'la': 20, 'glue-a': 25, 'torus': 5}


def scan(family, config, out, points=None):
    '''Writes the CSV of one scan family into ``out`` and returns its path.

    Families and columns are listed in :data:`SCAN_COLUMNS`; ``points``
    sets the grid resolution (b values, matrices per n, radii, or
    points per torus axis).

    Raises:
        :class:`slaglab.exceptions.UsageError` for an unknown family.
    '''
    if family not in SCAN_COLUMNS:
        raise UsageError("unknown scan family %r; expected one of %s" % (family, ', '.join(SCAN_COLUMNS)))
    points = points or _SCAN_DEFAULT_POINTS[family]
    rows = globals()['_scan_' + family.replace('-', '_')](config, points)
    path = os.path.join(out, 'scan_%s.csv' % family)
    return report.write_csv(path, SCAN_COLUMNS[family], rows)
