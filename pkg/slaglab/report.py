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

'''Reports, CSV scans and the timing sidecar.

A :class:`Report` is built from the check events a battery emits.  Its JSON
form is deterministic: keys are sorted, checks are ordered by key and no
wall time is included, so a fixed seed reproduces the file byte for byte.
Wall time is written to ``timing.json`` next to the reports.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['ANCHORS', 'CHECK_KINDS', 'PLUMBING', 'TIMING_FILE',
           'Check', 'Report',
           'jsonable', 'summarize_dir', 'write_csv', 'write_timing']


import collections
import csv
import json
import math
import os

import numpy as np

from . import __version__, __report_schema_version__
from .event import EventType
from . import util


#: tuple of str: "claim" checks a mathematical statement, "plumbing" an
#: implementation contract, "measurement" records a value without a verdict.
CHECK_KINDS = ('claim', 'plumbing', 'measurement')

#: str: Name of the wall-time sidecar in an output directory.
TIMING_FILE = 'timing.json'

#: str: Anchor of every plumbing check.
PLUMBING = 'plumbing'

#: dict: Statements a claim or measurement can be anchored to, by id.  A
#: plumbing check is anchored to "plumbing" instead.
ANCHORS = {
    'calabi-ansatz': "f'(U) = (1 + U^-n)^(1/n) gives a Ricci-flat Kahler metric with det g = 1",
    'eguchi-hanson': "the n = 2 profile f_a(U) = sqrt(U^2 + a^2) - a arcsinh(a/U) is Ricci-flat",
    'kcp1-form': "the Ricci-flat Kahler form on K_CP1 in the coordinates (z1, z2)",
    'asymptotic-flatness': "f_a(U) - U decays like a^2 away from the resolved singularity",
    'fixed-curves': "alpha and beta each fix sixteen disjoint curves; alpha beta fixes none",
    'torus-fibers': "the tori alpha + iR x beta + iR x gamma + iR are special Lagrangian",
    'fiber-cohomology': "the classes dx_j ^ dy_j pull back to zero on the torus fibers",
    'blowup-volume': "dz1 ^ ... ^ dzn pulls back to a constant multiple of dw1 ^ ... ^ dwn",
    'lbc-family': "L_bc is special Lagrangian for the flat and the K_CP1 metric",
    'lbc-divisor-circle': "L_bc meets the exceptional divisor in a circle",
    'lbc-coverage': "the family L_bc covers K_CP1 but does not fiber it",
    'la-family': "the graph L_A is Lagrangian exactly when A equals its transpose",
    'la-phase': "L_A is special of phase theta when the alternating minor sums vanish",
    'la-divisor': "the closure of L_A in the blowup meets the divisor smoothly",
    'la-limits': "degenerating L_A converge to Lagrangian planes",
    'glued-metric': "the cut-off Eguchi-Hanson necks glue to a positive Kahler metric",
    'glued-scaling': "the glued metric fails to be Ricci-flat by O(a^2) on the annulus only",
    'torus-perturbation': "an approximate special Lagrangian torus perturbs to a special Lagrangian one",
    'surgered-torus': "four copies of L_00 x T glue into the torus fiber through the singular curves",
}


def jsonable(value):
    '''Converts numpy scalars and arrays, complex numbers and phases to JSON types.'''
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, util.Phase):
        return value.radians
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, 'to_dict'):
        return jsonable(value.to_dict())
    return repr(value)


class Check(collections.namedtuple('Check', 'key passed kind value threshold message details anchor')):
    '''One verified or measured quantity.

    ``passed`` is None for measurements.  ``anchor`` is a key of
    :data:`ANCHORS`, or :data:`PLUMBING` for plumbing checks.
    '''
    __slots__ = ()

    def __new__(cls, key, passed, kind='claim', value=None, threshold=None, message='', details=None,
                anchor=None):
        if kind not in CHECK_KINDS:
            raise ValueError("unknown check kind %r" % (kind,))
        if kind == 'plumbing':
            anchor = PLUMBING if anchor is None else anchor
            if anchor != PLUMBING:
                raise ValueError("plumbing check %r must be anchored to %r" % (key, PLUMBING))
        elif anchor not in ANCHORS:
            raise ValueError("%s check %r needs an anchor from ANCHORS, got %r" % (kind, key, anchor))
        return super().__new__(cls, key, passed, kind, value, threshold, message, dict(details or {}),
                               anchor)

    @classmethod
    def from_event(cls, event):
        payload = dict(event.payload)
        passed = {EventType.CHECK_PASSED: True, EventType.CHECK_FAILED: False}.get(event.event_type)
        kind = payload.pop('kind', 'claim' if passed is not None else 'measurement')
        anchor = payload.pop('anchor', None)
        return cls(event.key, passed, kind, payload.pop('value', None), payload.pop('threshold', None),
                   event.message, payload, anchor)

    def to_dict(self):
        return {'key': self.key, 'passed': self.passed, 'kind': self.kind, 'anchor': self.anchor,
                'value': jsonable(self.value), 'threshold': jsonable(self.threshold),
                'message': self.message, 'details': jsonable(self.details)}


class Report:
    '''Checks of one battery run.

    Args:
        suite (str): battery name.
        seed (int): the run seed.
        config (dict): the validated configuration, as plain data.
    '''

    def __init__(self, suite, seed, config=None):
        self.suite = suite
        self.seed = seed
        self.config = config or {}
        self.checks = []
        self.notes = []

    def __repr__(self):
        return "<%s %s: %d checks, %d failed>" % (self.__class__.__name__, self.suite,
                                                 len(self.checks), len(self.failed))

    def add(self, check):
        self.checks.append(check)
        return check

    def add_events(self, events):
        for event in events:
            if event.event_type in (EventType.CHECK_PASSED, EventType.CHECK_FAILED, EventType.MEASURED):
                self.add(Check.from_event(event))
            elif event.event_type == EventType.WARNING:
                self.notes.append("%s: %s" % (event.key, event.message))

    @property
    def failed(self):
        '''list of Check: Checks with a negative verdict.'''
        return [c for c in self.checks if c.passed is False]

    @property
    def passed(self):
        '''bool: True when no check failed.'''
        return not self.failed

    def to_dict(self):
        checks = sorted(self.checks, key=lambda c: c.key)
        return {'schema_version': __report_schema_version__,
                'slaglab_version': __version__,
                'suite': self.suite,
                'seed': self.seed,
                'config': jsonable(self.config),
                'passed': self.passed,
                'counts': {'total': len(checks),
                           'failed': len(self.failed),
                           'measurements': sum(c.passed is None for c in checks)},
                'notes': sorted(self.notes),
                'anchors': {k: ANCHORS[k] for k in sorted({c.anchor for c in checks}) if k in ANCHORS},
                'checks': [c.to_dict() for c in checks]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n'

    def write(self, out_dir):
        '''Writes ``<suite>_report.json`` into out_dir and returns its path.'''
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, '%s_report.json' % self.suite)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.to_json())
        return path


def write_timing(out_dir, name, seconds):
    '''Merges one wall-time entry into the timing sidecar.'''
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, TIMING_FILE)
    timing = {}
    if os.path.exists(path):
        with open(path, encoding='utf-8') as f:
            try:
                timing = json.load(f)
            except ValueError:
                timing = {}
    timing[name] = round(float(seconds), 3)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(timing, f, sort_keys=True, indent=2)
    return path


def write_csv(path, columns, rows):
    '''Writes dict rows with a fixed column order; extra keys are an error.'''
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: jsonable(v) for k, v in row.items()})
    return path


def summarize_dir(path):
    '''Per-suite (suite, passed, failed, total) tuples from the reports in a directory.'''
    if not os.path.isdir(path):
        raise FileNotFoundError("no such report directory: %s" % path)
    out = []
    for name in sorted(os.listdir(path)):
        if not name.endswith('_report.json'):
            continue
        with open(os.path.join(path, name), encoding='utf-8') as f:
            data = json.load(f)
        counts = data.get('counts', {})
        out.append((data.get('suite', name), bool(data.get('passed')),
                    int(counts.get('failed', 0)), int(counts.get('total', 0))))
    return out
