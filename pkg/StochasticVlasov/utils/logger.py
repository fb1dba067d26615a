# Copyright 2020-     Robot Framework Foundation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import threading
from typing import Any, Callable, Dict, List

from robot.api import logger  # type: ignore

_THREAD_STASHES: Dict[int, List[List[Callable]]] = {}
_STASH_LOCK = threading.Lock()


def _stashing_logger(funk: Callable):
    def func(msg: Any, html=False):
        stashes = _THREAD_STASHES.get(threading.get_ident())
        if stashes is not None:
            stashes[-1].append(lambda: funk(msg, html))
        else:
            funk(msg, html)

    return func


@_stashing_logger
def info(msg: Any, html=False):
    logger.info(msg, html)


@_stashing_logger
def debug(msg: Any, html=False):
    logger.debug(msg, html)


@_stashing_logger
def trace(msg: Any, html=False):
    logger.trace(msg, html)


@_stashing_logger
def warn(msg: Any, html=False):
    logger.warn(msg, html)


@_stashing_logger
def error(msg: Any, html=False):
    logger.error(msg, html)


def console(msg: Any):
    logger.console(msg)


def stash_this_thread():
    ident = threading.get_ident()
    with _STASH_LOCK:
        if ident in _THREAD_STASHES:
            _THREAD_STASHES[ident].append([])
        else:
            _THREAD_STASHES[ident] = [[]]


def clear_thread_stash():
    _THREAD_STASHES[threading.get_ident()][-1] = []


def take_thread_stash() -> List[Callable]:
    """Detach the innermost stash of this thread without emitting it.

    Replica workers use this to hand their log calls back to the thread
    that owns the Robot Framework log, see `replay`.
    """
    ident = threading.get_ident()
    with _STASH_LOCK:
        stashes = _THREAD_STASHES[ident]
        calls = stashes.pop()
        if not stashes:
            del _THREAD_STASHES[ident]
    return calls


def replay(calls: List[Callable]):
    for logging_call in calls:
        logging_call()


def flush_and_delete_thread_stash():
    ident = threading.get_ident()
    with _STASH_LOCK:
        stashes = _THREAD_STASHES[ident]
        if len(stashes) == 1:
            calls = stashes[0]
            del _THREAD_STASHES[ident]
        else:
            last = stashes.pop()
            stashes[-1].extend(last)
            return
    replay(calls)
