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

'''Event log for verification batteries.

Every check a battery performs is announced on :data:`event_log`;
reports are assembled by draining the log, and a logging callback mirrors
the stream to the ``slaglab.general`` logger.
'''

# __all__ should order by constants, event classes, other classes, functions.
__all__ = ['EventType', 'CheckEvent', 'EventMessages', 'event_log', 'log_to_logger']

from enum import Enum
import collections

from . import logger


class EventType(Enum):
    SUITE_STARTED = 1
    SUITE_FINISHED = 2
    CHECK_PASSED = 3
    CHECK_FAILED = 4
    MEASURED = 5
    WARNING = 6


class CheckEvent(collections.namedtuple('CheckEvent', 'event_type key message payload')):
    '''One entry of the event log.

    ``payload`` is a plain dict of JSON-serializable values (possibly empty).
    '''
    __slots__ = ()


class EventMessages:

    def __init__(self) -> None:
        self.event_list = []
        self.event_callbacks = []

    def add_callback(self, callback_function):
        if callback_function not in self.event_callbacks:
            self.event_callbacks.append(callback_function)

    def remove_callback(self, callback_function):
        if callback_function in self.event_callbacks:
            self.event_callbacks.remove(callback_function)

    def message(self, event_type: EventType, key: str, message: str = '', payload=None):
        event = CheckEvent(event_type, key, message, dict(payload or {}))
        self.event_list.append(event)
        for fn in self.event_callbacks:
            fn(event)
        return event

    def pop_all_events(self):
        # take the first n elements and leave anything appended meanwhile
        n = len(self.event_list)
        pop = self.event_list[:n]
        self.event_list = self.event_list[n:]
        return pop


def log_to_logger(event: CheckEvent):
    '''Callback that mirrors events to the general logger.'''
    if event.event_type == EventType.CHECK_FAILED:
        logger.error("FAIL %s: %s", event.key, event.message)
    elif event.event_type == EventType.WARNING:
        logger.warning("%s: %s", event.key, event.message)
    elif event.event_type in (EventType.SUITE_STARTED, EventType.SUITE_FINISHED):
        logger.info("%s %s", event.event_type.name.lower().replace('_', ' '), event.key)
    else:
        logger.debug("%s %s: %s", event.event_type.name, event.key, event.message)


event_log = EventMessages()
