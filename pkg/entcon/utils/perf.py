# Copyright (C) 2021 The Entcon Contributors
#
# This file is part of Entcon.
#
# Entcon is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# Entcon is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with Entcon.  If not, see <http://www.gnu.org/licenses/>.

from asyncio import Future, ensure_future
from collections import deque
from dataclasses import dataclass
from functools import wraps
from threading import Lock
from time import perf_counter
from typing import Any, Callable, Deque, Dict

PERF_DATA_NUMBER_LIMIT = 200

PERF_DATA: Dict[str, Deque["PerfCell"]] = {}

_perf_data_lock = Lock()


@dataclass
class PerfCell(object):
    name: str
    t1: float
    t2: float

    def processing_time(self) -> float:
        return self.t2 - self.t1


def _cells(name: str) -> Deque[PerfCell]:
    with _perf_data_lock:
        if name not in PERF_DATA:
            PERF_DATA[name] = deque(maxlen=PERF_DATA_NUMBER_LIMIT)
        return PERF_DATA[name]


def perf_point(name: str):
    """Record the wall time of every call, keeping the latest cells only.

    Wrapped functions may run on executor threads; appends go to a bounded
    deque, which is safe to share between them.
    """
    cells = _cells(name)

    def decorator(f: Callable) -> Callable:
        @wraps(f)
        def wrapper(*args, **kwargs) -> Any:
            t1 = perf_counter()
            val = f(*args, **kwargs)
            cells.append(PerfCell(name, t1, perf_counter()))
            return val

        return wrapper

    return decorator


def async_perf_point(name: str):
    cells = _cells(name)

    def decorator(f: Callable) -> Callable:
        @wraps(f)
        def wrapper(*args, **kwargs) -> "Future[Any]":
            t1 = perf_counter()
            fut = ensure_future(f(*args, **kwargs))

            @fut.add_done_callback
            def perf_callback(fut):
                cells.append(PerfCell(name, t1, perf_counter()))

            return fut

        return wrapper

    return decorator


def perf_summary() -> Dict[str, Dict[str, float]]:
    """Count, mean and max processing time (seconds) per perf point."""
    summary: Dict[str, Dict[str, float]] = {}
    with _perf_data_lock:
        names = sorted(PERF_DATA)
    for name in names:
        times = [cell.processing_time() for cell in list(PERF_DATA[name])]
        if not times:
            continue
        summary[name] = {
            "count": float(len(times)),
            "mean": sum(times) / len(times),
            "max": max(times),
        }
    return summary
