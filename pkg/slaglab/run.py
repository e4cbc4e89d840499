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

'''The ``slaglab`` command line.

Three commands are available::

    slaglab verify <suite>   run a battery and write <suite>_report.json
    slaglab scan <family>    write scan_<family>.csv
    slaglab report <dir>     summarize the reports in a directory

Exit status is 0 when every check passed, 1 when a check failed, 2 for
usage errors and 3 for configuration errors.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['EXIT_CHECK_FAILED', 'EXIT_CONFIG', 'EXIT_OK', 'EXIT_USAGE',
           'build_parser', 'main', 'setup_basic_logging']


import argparse
import logging
import os
import sys
import warnings

from . import __version__, logger, logger_numerics
from .config import load_config
from .event import event_log, log_to_logger
from .exceptions import ConfigError, SlagLabException, UsageError
from . import report
from . import suites
from . import util


EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


def setup_basic_logging(general_log_level=None, numerics_log_level=None, target=sys.stderr,
                        deprecated_filter="default"):
    '''Helper to perform basic setup of the Python logging machinery.

    The library defines two loggers:

    * :data:`slaglab.logger` ("slaglab.general") - suite progress and
      warnings about suspicious parameters; and
    * :data:`slaglab.logger_numerics` ("slaglab.numerics") - optimizer
      iterations and finite-difference step control.

    Args:
        general_log_level (str): 'DEBUG', 'INFO', 'WARN', 'ERROR' or an equivalent
            constant from the :mod:`logging` module.  If None then a
            value will be read from the SLAGLAB_LOG_LEVEL environment variable.
        numerics_log_level (str): as general_log_level.  If None then a
            value will be read from the SLAGLAB_NUMERICS_LOG_LEVEL environment
            variable.
        target (object): The stream to send the log data to; defaults to stderr
        deprecated_filter (str): The filter for any DeprecationWarning messages.
    '''
    if deprecated_filter is not None:
        warnings.filterwarnings(deprecated_filter, category=DeprecationWarning)

    if general_log_level is None:
        general_log_level = os.environ.get('SLAGLAB_LOG_LEVEL', logging.INFO)
    if numerics_log_level is None:
        numerics_log_level = os.environ.get('SLAGLAB_NUMERICS_LOG_LEVEL', logging.WARNING)

    h = logging.StreamHandler(stream=target)
    f = logging.Formatter('%(asctime)s %(name)-16s %(levelname)-8s %(message)s')
    h.setFormatter(f)
    for lg, level in ((logger, general_log_level), (logger_numerics, numerics_log_level)):
        for old in [x for x in lg.handlers if getattr(x, '_slaglab', False)]:
            lg.removeHandler(old)
        h._slaglab = True
        lg.addHandler(h)
        lg.setLevel(level)
        lg.propagate = False


def _scan_help():
    return '; '.join('%s: %s' % (k, ','.join(v)) for k, v in suites.SCAN_COLUMNS.items())


def build_parser():
    parser = argparse.ArgumentParser(
        prog='slaglab', description="Numerical checks of special Lagrangian constructions.")
    parser.add_argument('--version', action='version', version='slaglab ' + __version__)
    parser.add_argument('--config', help="INI configuration file (default: built-in values)")
    parser.add_argument('--seed', type=int, help="override [suite] seed")
    parser.add_argument('--out', help="override [suite] out, the output directory")
    parser.add_argument('--tol-scale', type=float, dest='tol_scale',
                        help="multiply every hard tolerance")
    sub = parser.add_subparsers(dest='command', required=True)

    verify = sub.add_parser('verify', help="run a verification battery")
    verify.add_argument('suite', choices=suites.SUITES + ('all',))

    scan = sub.add_parser('scan', help="write a parameter scan as CSV",
                          epilog="columns per family: " + _scan_help())
    scan.add_argument('family', choices=tuple(suites.SCAN_COLUMNS))
    scan.add_argument('--points', type=int, help="grid resolution of the scan")

    rep = sub.add_parser('report', help="summarize the JSON reports in a directory")
    rep.add_argument('dir')
    return parser


def _verify(args, config):
    timer = util.Timeout()
    result = suites.run_suite(args.suite, config)
    path = result.write(config.suite.out)
    report.write_timing(config.suite.out, args.suite, timer.elapsed)
    for check in result.failed:
        logger.error("failed: %s (value=%s threshold=%s)", check.key, check.value, check.threshold)
    logger.info("%s: %d checks, %d failed -> %s", args.suite, len(result.checks),
                len(result.failed), path)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def _scan(args, config):
    if args.points is not None and args.points < 1:
        raise UsageError("--points must be positive")
    path = suites.scan(args.family, config, config.suite.out, args.points)
    logger.info("wrote %s", path)
    return EXIT_OK


def _report(args, config):
    try:
        rows = report.summarize_dir(args.dir)
    except FileNotFoundError as e:
        raise UsageError(str(e))
    if not rows:
        raise UsageError("no reports found in %s" % args.dir)
    failed_any = False
    for suite, passed, failed, total in rows:
        print("%-10s %s  %d/%d checks failed" % (suite, 'PASS' if passed else 'FAIL', failed, total))
        failed_any |= not passed
    return EXIT_CHECK_FAILED if failed_any else EXIT_OK


def main(argv=None):
    '''Entry point of the command line; returns the exit status.'''
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    setup_basic_logging()
    event_log.add_callback(log_to_logger)
    try:
        config = load_config(args.config).with_overrides(args.seed, args.out, args.tol_scale)
        return {'verify': _verify, 'scan': _scan, 'report': _report}[args.command](args, config)
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except UsageError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except SlagLabException as e:
        logger.error("%s: %s", e.__class__.__name__, e)
        return EXIT_CHECK_FAILED
    finally:
        event_log.remove_callback(log_to_logger)
