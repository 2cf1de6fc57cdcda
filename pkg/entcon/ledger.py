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

"""
About ledger

`RunLedger` remembers, per (command, configuration) fingerprint, the SHA-256 of
every CSV a run wrote. Running the same configuration again must reproduce the
same bytes; a differing digest is reported as `ReproducibilityMismatch`.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping

from .errors import ReproducibilityMismatch
from .utils.perf import async_perf_point
from .utils.storage import (
    DataclassRecordAdapter,
    DocumentStorage,
    RecordStorageWrapper,
    UnQLiteDocumentStorage,
)

COLLECTION_NAME = "runs"


@dataclass
class LedgerRecord(object):
    fingerprint: str
    command: str
    config: Dict[str, Any]
    output_digests: Dict[str, str]
    run_count: int
    tool_version: str = ""
    mismatches: List[str] = field(default_factory=list)


def fingerprint(command: str, config: Mapping[str, Any]) -> str:
    canonical = json.dumps(
        [command, dict(config)], sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RunLedger(RecordStorageWrapper[LedgerRecord]):
    __logger = logging.getLogger("entcon.ledger.RunLedger")

    def __init__(self, storage: DocumentStorage) -> None:
        super().__init__(storage, DataclassRecordAdapter(LedgerRecord))

    @async_perf_point("ledger.record_run")
    async def record_run(
        self,
        command: str,
        config: Mapping[str, Any],
        output_digests: Mapping[str, str],
        tool_version: str = "",
    ) -> LedgerRecord:
        """Record a run, or check it against the earlier run with the same fingerprint.

        The first run stores its digests. A later run bumps `run_count` if every
        digest both runs share agrees; otherwise the mismatching names are kept
        on the record and `ReproducibilityMismatch` is raised.
        """
        __logger = self.__logger.getChild(command)
        fp = fingerprint(command, config)
        record = await self.find_one({"fingerprint": fp})
        if record is None:
            new_record = LedgerRecord(
                fingerprint=fp,
                command=command,
                config=dict(config),
                output_digests=dict(output_digests),
                run_count=1,
                tool_version=tool_version,
            )
            await self.store(new_record)
            __logger.info("recorded first run %s", fp[:12])
            return new_record

        mismatched = sorted(
            name
            for name, digest in output_digests.items()
            if name in record.output_digests and record.output_digests[name] != digest
        )
        record.run_count += 1
        if mismatched:
            record.mismatches = sorted(set(record.mismatches) | set(mismatched))
            await self.update_one({"fingerprint": fp}, record)
            __logger.error(
                "run %s does not reproduce: %s", fp[:12], ", ".join(mismatched)
            )
            raise ReproducibilityMismatch(
                "outputs differ from the recorded run: {}".format(", ".join(mismatched))
            )
        for name, digest in output_digests.items():
            record.output_digests.setdefault(name, digest)
        await self.update_one({"fingerprint": fp}, record)
        __logger.info("run %s reproduced (%d runs)", fp[:12], record.run_count)
        return record

    def close(self) -> None:
        self.storage.close()


def open_ledger(path: str) -> RunLedger:
    from unqlite import UnQLite

    return RunLedger(UnQLiteDocumentStorage(UnQLite(path), COLLECTION_NAME))
