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
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from uuid import uuid4

import pytest

from entcon.utils.perf import (
    PERF_DATA,
    PERF_DATA_NUMBER_LIMIT,
    async_perf_point,
    perf_point,
    perf_summary,
)


class TestPerfUtils:
    def test_perf_point_can_create_perf_cells_if_they_are_not_found(self):
        test_str = str(uuid4())
        assert test_str not in PERF_DATA

        @perf_point(test_str)
        def spam():
            pass

        assert test_str in PERF_DATA
        assert isinstance(PERF_DATA[test_str], deque)

    def test_perf_point_can_record_perf_cell(self):
        test_str = str(uuid4())

        @perf_point(test_str)
        def spam():
            return 42

        assert spam() == 42
        assert len(PERF_DATA[test_str]) == 1
        cell = PERF_DATA[test_str][0]
        assert cell.name == test_str
        assert cell.t2 >= cell.t1

    def test_perf_point_can_keep_cells_in_limit(self):
        test_str = str(uuid4())

        @perf_point(test_str)
        def spam():
            pass

        for _ in range(0, PERF_DATA_NUMBER_LIMIT + 1):
            spam()

        assert len(PERF_DATA[test_str]) == PERF_DATA_NUMBER_LIMIT

    def test_perf_point_can_record_from_worker_threads(self):
        test_str = str(uuid4())

        @perf_point(test_str)
        def spam(x):
            return x * 2

        with ThreadPoolExecutor(4) as executor:
            assert list(executor.map(spam, range(50))) == [x * 2 for x in range(50)]
        assert len(PERF_DATA[test_str]) == 50

    def test_perf_summary_should_aggregate_recorded_cells(self):
        test_str = str(uuid4())

        @perf_point(test_str)
        def spam():
            pass

        for _ in range(3):
            spam()
        summary = perf_summary()[test_str]
        assert summary["count"] == 3.0
        assert 0.0 <= summary["mean"] <= summary["max"]

    @pytest.mark.asyncio
    async def test_async_perf_point_can_record_perf_cell(self):
        test_str = str(uuid4())

        @async_perf_point(test_str)
        async def spam():
            return "eggs"

        assert await spam() == "eggs"
        assert len(PERF_DATA[test_str]) == 1
        assert PERF_DATA[test_str][0].name == test_str

    @pytest.mark.asyncio
    async def test_async_perf_point_can_keep_cells_in_limit(self):
        test_str = str(uuid4())

        @async_perf_point(test_str)
        async def spam():
            pass

        for _ in range(0, PERF_DATA_NUMBER_LIMIT + 1):
            await spam()

        assert len(PERF_DATA[test_str]) == PERF_DATA_NUMBER_LIMIT
