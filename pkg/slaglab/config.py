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

'''Run configuration.

A run is configured by an INI file with one section per module::

    [suite]
    seed = 7
    out = user_data

    [neck]
    r0 = 0.5
    r1 = 1.0
    a_list = 0.1, 0.05, 0.025, 0.0125

Every section is validated by a pydantic model; a bad value raises
:class:`slaglab.exceptions.ConfigError` carrying the line it came from.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['GeomConfig', 'OrbifoldConfig', 'PerturbConfig', 'SlagConfig',
           'SuiteConfig', 'SuiteSection',
           'load_config']


import configparser
import re
from typing import Optional, Tuple

import pydantic

from .exceptions import ConfigError
from .gluing import NeckConfig
from . import orbifold
from . import util


class _Section(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(frozen=True, extra='forbid')


class SuiteSection(_Section):
    seed: int = 7
    out: str = 'user_data'
    tol_scale: float = 1.0

    @pydantic.field_validator('tol_scale')
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("tol_scale must be positive")
        return v


class GeomConfig(_Section):
    fd_step: float = util.DEFAULT_FD_STEP
    ricci_step: float = 1e-4


class OrbifoldConfig(_Section):
    tau1: complex = orbifold.DEFAULT_TAU
    tau2: complex = orbifold.DEFAULT_TAU
    tau3: complex = orbifold.DEFAULT_TAU
    strict_periods: bool = True
    intersect_tol: float = orbifold.INTERSECT_TOL

    @pydantic.field_validator('tau1', 'tau2', 'tau3', mode='before')
    @classmethod
    def _complex(cls, v):
        if isinstance(v, str):
            v = complex(v.replace(' ', '').replace('i', 'j'))
        v = complex(v)
        if not v.imag > 0:
            raise ValueError("periods need a positive imaginary part")
        return v

    def build(self):
        return orbifold.Orbifold((self.tau1, self.tau2, self.tau3), self.strict_periods,
                                 self.intersect_tol)


class SlagConfig(_Section):
    grid: int = 8
    coverage_samples: int = 1000
    coverage_b_points: int = 401
    coverage_tol: float = 5e-3
    random_matrices: int = 100


class PerturbConfig(_Section):
    modes: int = 4
    tol: float = 1e-12
    max_iter: int = 200
    grid: int = 12
    r0: float = 0.1
    r1: float = 0.2
    a: float = 0.01
    guard: float = 0.25

    @pydantic.field_validator('modes', 'max_iter', 'grid')
    @classmethod
    def _count(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @pydantic.model_validator(mode='after')
    def _resolves(self):
        if self.grid <= 2 * self.modes:
            raise ValueError("grid must exceed 2*modes to resolve every mode")
        return self

    def neck(self):
        return NeckConfig(r0=self.r0, r1=self.r1, a=self.a, a_list=[self.a])


class SuiteConfig(_Section):
    '''Validated configuration of a whole run.'''
    suite: SuiteSection = SuiteSection()
    geom: GeomConfig = GeomConfig()
    orbifold: OrbifoldConfig = OrbifoldConfig()
    slag: SlagConfig = SlagConfig()
    neck: NeckConfig = NeckConfig()
    perturb: PerturbConfig = PerturbConfig()

    def with_overrides(self, seed=None, out=None, tol_scale=None):
        '''A copy with command-line overrides applied to [suite].'''
        update = {k: v for k, v in (('seed', seed), ('out', out), ('tol_scale', tol_scale))
                  if v is not None}
        if not update:
            return self
        try:
            suite = SuiteSection(**{**self.suite.model_dump(), **update})
        except pydantic.ValidationError as e:
            raise ConfigError("command-line override: %s" % e.errors()[0]["msg"])
        return self.model_copy(update={'suite': suite})


_LIST_KEYS = {('neck', 'a_list'), ('neck', 'a_vector')}


def _locate(text, section, key=None):
    # line number of [section] or of key inside it, 1-based
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.match(r'\[(.+)\]$', stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if current == section and key is not None and re.match(r'%s\s*[=:]' % re.escape(key), stripped):
            return lineno
    return None


def _raw_sections(parser):
    raw = {}
    for section in parser.sections():
        values = {}
        for key, value in parser.items(section):
            if (section, key) in _LIST_KEYS:
                values[key] = [float(x) for x in re.split(r'[,\s]+', value.strip()) if x]
            else:
                values[key] = value
        raw[section] = values
    return raw


def load_config(path=None, text=None):
    '''Parses and validates an INI config; defaults when both arguments are None.

    Raises:
        :class:`slaglab.exceptions.ConfigError` with the offending line number.
    '''
    if path is not None:
        try:
            with open(path, encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError("cannot read config %s: %s" % (path, e))
    if text is None:
        return SuiteConfig()

    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError("malformed config: %s" % e, getattr(e, 'lineno', None))

    unknown = [s for s in parser.sections() if s not in SuiteConfig.model_fields]
    if unknown:
        raise ConfigError("unknown section [%s]" % unknown[0], _locate(text, unknown[0]))
    try:
        raw = _raw_sections(parser)
    except ValueError as e:
        bad = next((s, k) for s, k in _LIST_KEYS if parser.has_option(s, k))
        raise ConfigError("bad list value for %s.%s: %s" % (bad[0], bad[1], e), _locate(text, *bad))
    try:
        return SuiteConfig(**raw)
    except pydantic.ValidationError as e:
        err = e.errors()[0]
        loc: Tuple = tuple(str(x) for x in err['loc'])
        section = loc[0] if loc else None
        key: Optional[str] = loc[1] if len(loc) > 1 else None
        lineno = _locate(text, section, key) if key else _locate(text, section) if section else None
        where = '.'.join(loc) or 'config'
        raise ConfigError("%s: %s" % (where, err['msg']), lineno)
