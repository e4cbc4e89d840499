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

import sys
if sys.version_info < (3,9):
    sys.exit('slaglab requires Python 3.9 or later')

from .version import __version__, __report_schema_version__


import logging as _logging

#: The general purpose logger logs suite progress, warnings and check outcomes.
logger = _logging.getLogger('slaglab.general')

#: The numerics logger logs optimizer iterations and finite-difference step control.
logger_numerics = _logging.getLogger('slaglab.numerics')

del _logging

from . import exceptions
from . import util
from . import event
from . import geom
from . import canonical
from . import orbifold
from . import slag
from . import gluing
from . import perturb
from . import config
from . import report
from . import suites
from . import run

from .exceptions import *
from .run import *


__all__ = ['logger', 'logger_numerics',
           'canonical', 'config', 'event', 'exceptions', 'geom', 'gluing',
           'orbifold', 'perturb', 'report', 'run', 'slag', 'suites', 'util'] + \
          (run.__all__ + exceptions.__all__)
