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

'''Utility classes and functions shared by the geometry modules.

Contains :class:`Phase` for calibration phases, :class:`ParameterBox` for
the real parameter boxes of immersions, :class:`Timeout` for run budgets
and the central finite-difference stencils used wherever closed-form
derivatives are not available.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['DEFAULT_FD_STEP',
           'ParameterBox', 'Phase', 'Timeout',
           'complex_hessian', 'make_rng', 'phase', 'real_hessian',
           'relative_step', 'root_of_unity_multiple']


import collections
import math
import time

import numpy as np


#: float: Default relative step of the central finite-difference stencils.
DEFAULT_FD_STEP = 1e-4


class ParameterBox(collections.namedtuple('ParameterBox', 'lower upper')):
    '''An axis-aligned box in a real parameter space.

    Immersions are sampled on a midpoint grid of their box; the same grid
    doubles as the quadrature rule for integrated defects.

    .. py:attribute:: lower

        tuple of float - Lower corner of the box.

    .. py:attribute:: upper

        tuple of float - Upper corner of the box.
    '''
    __slots__ = ()

    @classmethod
    def cube(cls, dim, lower=0.0, upper=1.0):
        return cls(tuple([float(lower)] * dim), tuple([float(upper)] * dim))

    @property
    def dim(self):
        '''int: Dimension of the box.'''
        return len(self.lower)

    @property
    def widths(self):
        '''numpy.ndarray: Edge lengths.'''
        return np.asarray(self.upper, dtype=float) - np.asarray(self.lower, dtype=float)

    @property
    def centroid(self):
        '''numpy.ndarray: Center of the box.'''
        return 0.5 * (np.asarray(self.upper, dtype=float) + np.asarray(self.lower, dtype=float))

    def axes(self, points_per_axis):
        '''Midpoint samples along each axis, as a list of 1D arrays.'''
        lower = np.asarray(self.lower, dtype=float)
        widths = self.widths
        return [lower[k] + widths[k] * (np.arange(points_per_axis) + 0.5) / points_per_axis
                for k in range(self.dim)]

    def grid(self, points_per_axis):
        '''Midpoint grid flattened to shape (points_per_axis**dim, dim).'''
        if points_per_axis < 1:
            raise ValueError("points_per_axis must be positive")
        mesh = np.meshgrid(*self.axes(points_per_axis), indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def cell_volume(self, points_per_axis):
        '''float: Quadrature weight of one midpoint cell.'''
        return float(np.prod(self.widths)) / points_per_axis ** self.dim


class Phase:
    '''A calibration phase θ, stored modulo π.

    Special Lagrangian with phase θ means Im(e^{iθ}Ω)|_L = 0, which only
    sees θ modulo π; two phases compare equal when they agree mod π.

    Args:
        radians (float): The phase in radians.
    '''

    __slots__ = ('_radians')

    def __init__(self, radians):
        self._radians = float(radians) % math.pi

    def __repr__(self):
        return "<%s %.6f radians mod pi>" % (self.__class__.__name__, self.radians)

    def __add__(self, other):
        if not isinstance(other, Phase):
            raise TypeError("Unsupported type for + expected Phase")
        return Phase(self.radians + other.radians)

    def __sub__(self, other):
        if not isinstance(other, Phase):
            raise TypeError("Unsupported type for - expected Phase")
        return Phase(self.radians - other.radians)

    def __eq__(self, other):
        if not isinstance(other, Phase):
            raise TypeError("Unsupported type for comparison expected Phase")
        return self.distance(other) == 0

    def __hash__(self):
        return hash(self._radians)

    @classmethod
    def fit(cls, value):
        '''The phase that rotates a complex number onto the real axis.'''
        if value == 0:
            raise ValueError("Cannot fit a phase to zero")
        return cls(-np.angle(value))

    @property
    def radians(self):
        '''float: The phase in [0, pi).'''
        return self._radians

    @property
    def unit(self):
        '''complex: e^{iθ}.'''
        return complex(np.exp(1j * self._radians))

    def distance(self, other):
        '''float: Distance to another phase on the circle of length pi.'''
        d = abs(self._radians - float(other.radians if isinstance(other, Phase) else other) % math.pi)
        return min(d, math.pi - d)

    def is_congruent(self, radians, tol=1e-12):
        '''bool: True if this phase agrees with ``radians`` modulo pi.'''
        return self.distance(Phase(radians)) <= tol


def phase(radians):
    '''Returns a :class:`Phase` for the given number of radians.'''
    return Phase(radians)


class Timeout:
    '''Tracks elapsed wall time against an optional budget.

    Args:
        timeout (float): Seconds allotted before :attr:`is_timed_out` turns True,
            or None for no budget.
    '''
    def __init__(self, timeout=None):
        self.start = time.monotonic()
        self.timeout = timeout

    @property
    def elapsed(self):
        '''float: Seconds since construction.'''
        return time.monotonic() - self.start

    @property
    def is_timed_out(self):
        '''bool: True if the budget has been used up.'''
        if self.timeout is None:
            return False
        return self.elapsed > self.timeout

    @property
    def remaining(self):
        '''float: Seconds left, never negative; math.inf without a budget.'''
        if self.timeout is None:
            return math.inf
        return max(0.0, self.timeout - self.elapsed)


def make_rng(seed):
    '''A numpy Generator; every randomized check draws from one of these.'''
    return np.random.default_rng(seed)


def relative_step(z, h=DEFAULT_FD_STEP):
    '''Step size h scaled by the coordinate magnitude, never below h.'''
    scale = float(np.max(np.abs(z))) if np.size(z) else 0.0
    return h * max(1.0, scale)


def real_hessian(fn, x, h):
    '''Central-difference Hessian of a real function of a real vector.

    Args:
        fn (callable): maps a 1D float array to a float.
        x (numpy.ndarray): evaluation point.
        h (float): absolute step.

    Returns:
        numpy.ndarray: symmetric (m, m) matrix.
    '''
    x = np.asarray(x, dtype=float)
    m = x.size
    f0 = fn(x)
    hess = np.empty((m, m))
    eye = np.eye(m) * h
    for i in range(m):
        hess[i, i] = (fn(x + eye[i]) - 2.0 * f0 + fn(x - eye[i])) / (h * h)
        for j in range(i + 1, m):
            fpp = fn(x + eye[i] + eye[j])
            fpm = fn(x + eye[i] - eye[j])
            fmp = fn(x - eye[i] + eye[j])
            fmm = fn(x - eye[i] - eye[j])
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    return hess


def complex_hessian(fn, z, h):
    '''Finite-difference ∂²F/∂z_i∂z̄_j of a real function of complex coordinates.

    Uses ∂_{z_i}∂_{z̄_j} = ¼(∂x_i∂x_j + ∂y_i∂y_j + i(∂x_i∂y_j − ∂y_i∂x_j)).
    '''
    z = np.asarray(z, dtype=complex)
    n = z.size

    def real_fn(x):
        return fn(x[:n] + 1j * x[n:])

    hess = real_hessian(real_fn, np.concatenate([z.real, z.imag]), h)
    hxx = hess[:n, :n]
    hyy = hess[n:, n:]
    hxy = hess[:n, n:]
    return 0.25 * (hxx + hyy + 1j * (hxy - hxy.T))


def root_of_unity_multiple(a, b, n, tol=1e-10):
    '''Returns k with a = e^{2πik/n}·b (componentwise), or None.'''
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(b))))
    for k in range(n):
        if np.max(np.abs(a - np.exp(2j * np.pi * k / n) * b)) <= tol * scale:
            return k
    return None
