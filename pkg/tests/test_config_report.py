import json
import math
import os

import numpy as np
from pytest import mark, raises

from slaglab import util
from slaglab.config import SuiteConfig, load_config
from slaglab.event import EventMessages, EventType
from slaglab.exceptions import ConfigError
from slaglab.report import (ANCHORS, PLUMBING, Check, Report, jsonable, summarize_dir,
                            write_csv, write_timing)

_INI = os.path.join(os.path.dirname(__file__), os.pardir, 'slaglab.ini')


def test_defaults():
    config = load_config()
    assert config == SuiteConfig()
    assert config.suite.seed == 7
    assert config.neck.a_list == [0.1, 0.05, 0.025, 0.0125]
    assert config.perturb.neck().r1 == 0.2


def test_shipped_ini_matches_defaults():
    assert load_config(_INI) == SuiteConfig()


def test_text_overrides():
    config = load_config(text="[suite]\nseed = 11\n[orbifold]\ntau2 = 0.5 + 2i\n"
                              "[neck]\na_list = 0.2, 0.1 0.05\n")
    assert config.suite.seed == 11
    assert config.orbifold.tau2 == 0.5 + 2j
    assert config.orbifold.tau1 == 1j
    assert config.neck.a_list == [0.2, 0.1, 0.05]


@mark.parametrize("text, lineno", [
    ("[suite]\nseed = 3\n\n[perturb]\nmodes = 0\n", 5),
    ("[bogus]\nx = 1\n", 1),
    ("[suite]\nfoo = 1\n", 2),
    ("[neck]\nr0 = 0.5\na_list = 0.1, x\n", 3),
    ("seed = 1\n", 1),
    ("[orbifold]\ntau1 = 2\n", 2),
    ("[perturb]\nmodes = 6\ngrid = 12\n", 1),
    ("[neck]\nr0 = 1.0\nr1 = 0.5\n", 1),
])
def test_errors_carry_line_numbers(text, lineno):
    with raises(ConfigError) as info:
        load_config(text=text)
    assert info.value.lineno == lineno
    assert str(info.value).startswith("line %d: " % lineno)


def test_missing_file(tmp_path):
    with raises(ConfigError):
        load_config(str(tmp_path / 'nope.ini'))


def test_with_overrides():
    config = SuiteConfig()
    assert config.with_overrides() is config
    changed = config.with_overrides(seed=3, out='elsewhere', tol_scale=2.0)
    assert (changed.suite.seed, changed.suite.out, changed.suite.tol_scale) == (3, 'elsewhere', 2.0)
    assert config.suite.seed == 7
    with raises(ConfigError):
        config.with_overrides(tol_scale=0.0)


def test_jsonable():
    assert jsonable(np.float64(0.5)) == 0.5
    assert jsonable(float('nan')) is None
    assert jsonable(1 + 2j) == [1.0, 2.0]
    assert jsonable(np.arange(3)) == [0, 1, 2]
    assert jsonable(np.bool_(True)) is True
    assert jsonable(util.Phase(math.pi / 2)) == math.pi / 2
    assert jsonable({1: (np.int64(2),)}) == {'1': [2]}


def test_check_kinds():
    with raises(ValueError):
        Check('x', True, kind='opinion', anchor='fixed-curves')
    assert Check('x', None, kind='measurement', anchor='blowup-volume').to_dict()['passed'] is None


def test_check_anchors():
    assert Check('x', True, kind='plumbing').anchor == PLUMBING
    assert Check('x', True, anchor='lbc-family').to_dict()['anchor'] == 'lbc-family'
    with raises(ValueError):
        Check('x', True)
    with raises(ValueError):
        Check('x', True, anchor='somewhere')
    with raises(ValueError):
        Check('x', None, kind='measurement', anchor=PLUMBING)
    with raises(ValueError):
        Check('x', True, kind='plumbing', anchor='lbc-family')


def _report():
    rep = Report('demo', 7, {'suite': {'seed': 7}})
    rep.add(Check('b.second', False, value=2.0, threshold=1.0, anchor='la-phase'))
    rep.add(Check('a.first', True, value=np.float64(0.1), threshold=1.0, details={'z': 1j},
                  anchor='fixed-curves'))
    rep.add(Check('c.third', None, kind='measurement', value=[1, 2], anchor='fixed-curves'))
    rep.add(Check('d.fourth', True, kind='plumbing'))
    return rep


def test_report_json_is_deterministic():
    first, second = _report().to_json(), _report().to_json()
    assert first == second
    data = json.loads(first)
    assert [c['key'] for c in data['checks']] == ['a.first', 'b.second', 'c.third', 'd.fourth']
    assert [c['anchor'] for c in data['checks']] == ['fixed-curves', 'la-phase', 'fixed-curves', PLUMBING]
    assert data['anchors'] == {k: ANCHORS[k] for k in ('fixed-curves', 'la-phase')}
    assert data['schema_version'] == 3
    assert data['counts'] == {'total': 4, 'failed': 1, 'measurements': 1}
    assert data['passed'] is False
    assert data['checks'][0]['details'] == {'z': [0.0, 1.0]}


def test_report_write_and_summarize(tmp_path):
    path = _report().write(str(tmp_path))
    assert os.path.basename(path) == 'demo_report.json'
    ok = Report('good', 7)
    ok.add(Check('x', True, kind='plumbing'))
    ok.write(str(tmp_path))
    assert summarize_dir(str(tmp_path)) == [('demo', False, 1, 4), ('good', True, 0, 1)]
    with raises(FileNotFoundError):
        summarize_dir(str(tmp_path / 'missing'))


def test_write_timing_merges(tmp_path):
    write_timing(str(tmp_path), 'orbifold', 1.23456)
    path = write_timing(str(tmp_path), 'metrics', 2)
    with open(path) as f:
        assert json.load(f) == {'metrics': 2.0, 'orbifold': 1.235}


def test_write_csv(tmp_path):
    path = write_csv(str(tmp_path / 'sub' / 'scan.csv'), ['a', 'b'],
                     [{'a': 1, 'b': np.float64(0.5)}, {'a': 2}])
    with open(path) as f:
        assert f.read() == "a,b\n1,0.5\n2,\n"
    with raises(ValueError):
        write_csv(str(tmp_path / 'bad.csv'), ['a'], [{'a': 1, 'c': 2}])


def test_event_callbacks():
    events = EventMessages()
    seen = []
    events.add_callback(seen.append)
    events.add_callback(seen.append)
    events.message(EventType.CHECK_PASSED, 'k', 'ok', {'value': 1})
    assert len(seen) == 1
    events.remove_callback(seen.append)
    events.message(EventType.WARNING, 'w', 'careful')
    assert len(seen) == 1
    popped = events.pop_all_events()
    assert [e.key for e in popped] == ['k', 'w']
    assert events.pop_all_events() == []


def test_report_from_events():
    events = EventMessages()
    events.message(EventType.SUITE_STARTED, 'demo')
    events.message(EventType.CHECK_FAILED, 'k', 'too big', {'value': 2.0, 'threshold': 1.0, 'anchor': 'la-phase'})
    events.message(EventType.MEASURED, 'm', '', {'kind': 'measurement', 'value': 3, 'anchor': 'la-divisor'})
    events.message(EventType.WARNING, 'w', 'careful')
    rep = Report('demo', 1)
    rep.add_events(events.pop_all_events())
    assert [c.key for c in rep.failed] == ['k']
    assert rep.checks[1].passed is None
    assert rep.notes == ['w: careful']
    assert [c.anchor for c in rep.checks] == ['la-phase', 'la-divisor']
    assert 'anchor' not in rep.checks[0].details
