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

'''Explicit Ricci-flat local models.

The Eguchi-Hanson type potential on the resolution of ℂ²/ℤ₂,

    f_a(U) = U·sqrt(1 + a²/U²) + a·ln(U / (sqrt(U² + a²) + a)),

is evaluated in the equivalent form sqrt(U² + a²) − a·asinh(a/U), which
avoids the cancellation in f_a − U for small a.  The Calabi ansatz on
K_{ℂP^{n−1}} is given through (f′, f″) only; its potential is never needed.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['EguchiHansonPotential', 'CalabiPotential',
           'calabi_det_check', 'calabi_profile', 'eh_discrepancy', 'eh_value',
           'kcp1_omega_coefficients']


import numpy as np

from .exceptions import DomainError, PreconditionError
from .geom import RadialPotential


def _check_u(U):
    U = np.asarray(U, dtype=float)
    if np.any(~(U > 0)):
        raise DomainError("U must be positive, got %s" % (U.min() if U.size else U,))
    return U


def _check_a(a):
    a = float(a)
    if not a >= 0:
        raise DomainError("resolution parameter a must be non-negative, got %r" % a)
    return a


def eh_value(U, a):
    '''(f, f′, f″) of the Eguchi-Hanson type profile.

    Works elementwise on arrays.  ``a = 0`` is accepted as the flat limit
    (U, 1, 0).

    Raises:
        :class:`slaglab.exceptions.DomainError` if U ≤ 0 or a < 0.
    '''
    U = _check_u(U)
    a = _check_a(a)
    if a == 0:
        return U.copy(), np.ones_like(U), np.zeros_like(U)
    root = np.sqrt(U * U + a * a)
    f = root - a * np.arcsinh(a / U)
    f1 = root / U
    f2 = -a * a / (U ** 3 * f1)
    return f, f1, f2


def eh_discrepancy(U, a):
    '''f_a(U) − U without cancellation.'''
    U = _check_u(U)
    a = _check_a(a)
    if a == 0:
        return np.zeros_like(U)
    return a * a / (np.sqrt(U * U + a * a) + U) - a * np.arcsinh(a / U)


def kcp1_omega_coefficients(U):
    '''Coefficients of ∂∂̄U and ∂U∧∂̄U in the Ricci-flat form on K_{ℂP¹}.

    The displayed form (√−1/(U²√(1+U²)))[(1+U²)U ∂∂̄U − ∂U∧∂̄U] in the
    (f′, f″) format.
    '''
    U = _check_u(U)
    s = np.sqrt(1.0 + U * U)
    return s / U, -1.0 / (U * U * s)


def calabi_profile(U, n):
    '''(f′, f″) of the Calabi ansatz on K_{ℂP^{n−1}}.'''
    if int(n) < 2:
        raise PreconditionError("Calabi ansatz needs n >= 2, got %r" % (n,))
    U = _check_u(U)
    x = U ** (-n)
    f1 = (1.0 + x) ** (1.0 / n)
    f2 = -U ** (-n - 1) * (1.0 + x) ** ((1.0 - n) / n)
    return f1, f2


class EguchiHansonPotential(RadialPotential):
    '''f_a(|w₁|² + |w₂|²), optionally plus |w₃|² for a flat factor along a curve.

    Args:
        a (float): resolution parameter, non-negative.
        flat_dim (int): number of trailing flat coordinates (1 for K_{ℂP¹}×E).
    '''

    def __init__(self, a, flat_dim=0):
        self.a = _check_a(a)
        super().__init__(2, flat_dim, label="EH(a=%g)%s" % (self.a, " x E" * flat_dim))

    def profile(self, U):
        return eh_value(U, self.a)


class CalabiPotential(RadialPotential):
    '''Metric data of the Calabi ansatz on ℂⁿ∖{0}.

    Only (f′, f″) exist; :meth:`value` is not available.
    '''

    def __init__(self, n):
        if int(n) < 2:
            raise PreconditionError("Calabi ansatz needs n >= 2, got %r" % (n,))
        self.n = int(n)
        super().__init__(self.n, 0, label="Calabi K_CP%d" % (self.n - 1))

    def profile(self, U):
        f1, f2 = calabi_profile(U, self.n)
        return np.full_like(np.asarray(U, dtype=float), np.nan), f1, f2

    def value(self, z):
        raise NotImplementedError("the Calabi potential itself is not materialized")


def calabi_det_check(n, z, flat=False):
    '''det(f′δ_{ij} + f″z̄_i z_j) for the Calabi ansatz at z; identically 1.

    Args:
        n (int): dimension, at least 2.
        z: point of ℂⁿ∖{0}.
        flat (bool): use the flat control (f′ = 1, f″ = 0) instead.

    Raises:
        :class:`slaglab.exceptions.DomainError` at z = 0.
    '''
    z = np.asarray(z, dtype=complex)
    if z.shape != (int(n),):
        raise PreconditionError("expected a point of C^%d, got shape %s" % (n, z.shape))
    U = float(np.sum(np.abs(z) ** 2))
    if U == 0:
        raise DomainError("the Calabi metric is not evaluated at the origin")
    if flat:
        f1, f2 = 1.0, 0.0
    else:
        f1, f2 = calabi_profile(U, n)
    g = float(f1) * np.eye(int(n)) + float(f2) * np.outer(np.conj(z), z)
    return float(np.linalg.det(g).real)
