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

'''Library-specific exception classes.

Measured quantities (a non-positive glued metric, a stalled optimizer, a
non-smooth divisor sample) are never raised; they are returned as values
and end up in the report.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['SlagLabException', 'DomainError', 'ChartBoundaryError',
        'DegenerateMetricError', 'ImmersionError', 'DimensionMismatch',
        'PreconditionError', 'SizeError', 'InsufficientDataError',
        'GuardedStepError', 'CollarMismatchError', 'ConfigError', 'UsageError']


class SlagLabException(Exception):
    '''Base class of all slaglab exceptions.'''

class DomainError(SlagLabException, ValueError):
    '''Raised when a point or parameter lies outside the admissible domain.'''

class ChartBoundaryError(DomainError):
    '''Raised when a point sits on the boundary of a coordinate chart (z₁ = 0 for blowup charts).'''

class DegenerateMetricError(SlagLabException):
    '''Raised if a metric fails to be positive definite where it has to be.'''
    def __init__(self, message, point=None, *args):
        super().__init__(message, point, *args)
        #: numpy.ndarray: The offending point, if known.
        self.point = point

    def __str__(self):
        return str(self.args[0])

class ImmersionError(SlagLabException):
    '''Raised if a parametrized immersion has a rank-deficient Jacobian.'''
    def __init__(self, message, point=None, min_singular_value=None, *args):
        super().__init__(message, point, min_singular_value, *args)
        #: numpy.ndarray: The parameter where the rank test failed.
        self.point = point
        #: float: The smallest singular value found there.
        self.min_singular_value = min_singular_value

    def __str__(self):
        return str(self.args[0])

class DimensionMismatch(SlagLabException, ValueError):
    '''Raised when array or chart dimensions disagree.'''

class PreconditionError(SlagLabException, ValueError):
    '''Raised when an operation is called outside its documented precondition.'''

class SizeError(PreconditionError):
    '''Raised when an exhaustive enumeration would be too large.'''

class InsufficientDataError(SlagLabException, ValueError):
    '''Raised when a fit is requested on too few samples.'''

class GuardedStepError(SlagLabException):
    '''Raised when a deformation leaves the region where its chart is valid.'''

class CollarMismatchError(SlagLabException):
    '''Raised when the pieces of a surgered torus do not match across a collar.'''
    def __init__(self, message, collars=None, *args):
        super().__init__(message, collars, *args)
        #: list of dict: Per-collar diagnostics (curve, mismatch, tolerance).
        self.collars = collars or []

    def __str__(self):
        return str(self.args[0])

class ConfigError(SlagLabException):
    '''Raised when the configuration file cannot be parsed or validated.'''
    def __init__(self, message, lineno=None, *args):
        super().__init__(message, lineno, *args)
        #: int: Line number in the config file, when it can be located.
        self.lineno = lineno

    def __str__(self):
        if self.lineno is None:
            return str(self.args[0])
        return "line %d: %s" % (self.lineno, self.args[0])

class UsageError(SlagLabException):
    '''Raised for an unknown suite, scan family or malformed command line.'''
