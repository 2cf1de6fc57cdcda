import logging

import pytest

from entcon.errors import ReproducibilityMismatch
from entcon.ledger import LedgerRecord, RunLedger, fingerprint
from entcon.utils.storage import (
    DataclassRecordAdapter,
    MemoryDocumentStorage,
    UnQLiteDocumentStorage,
    doc_match,
)

CONFIG = {"qubits": 3, "p": [0.0, 0.3], "samples": 100, "seed": 42}


class TestFingerprint:
    def test_key_order_should_not_matter(self):
        reordered = dict(reversed(list(CONFIG.items())))
        assert fingerprint("sample", CONFIG) == fingerprint("sample", reordered)

    def test_command_and_values_should_matter(self):
        assert fingerprint("sample", CONFIG) != fingerprint("sweep", CONFIG)
        other_seed = {**CONFIG, "seed": 43}
        assert fingerprint("sample", CONFIG) != fingerprint("sample", other_seed)


class TestDocumentMatching:
    def test_every_query_key_should_match(self):
        doc = {"a": 1, "b": 2}
        assert doc_match(doc, {"a": 1})
        assert doc_match(doc, {"a": 1, "b": 2})
        assert not doc_match(doc, {"a": 1, "b": 3})
        assert not doc_match(doc, {"c": 1})

    def test_dataclass_adapter_should_drop_backend_keys(self):
        adapter = DataclassRecordAdapter(LedgerRecord)
        record = LedgerRecord("f", "sample", {}, {}, 1)
        doc = adapter.record2dict(record)
        doc["__id"] = 7
        assert adapter.dict2record(doc) == record


class TestRunLedger:
    @pytest.mark.asyncio
    async def test_first_run_should_be_recorded(self):
        ledger = RunLedger(MemoryDocumentStorage())
        record = await ledger.record_run(
            "sample", CONFIG, {"records_p0.csv": "aa"}, "0.1.0"
        )
        assert record.run_count == 1
        stored = await ledger.find_one({"fingerprint": fingerprint("sample", CONFIG)})
        assert stored == record

    @pytest.mark.asyncio
    async def test_identical_rerun_should_increment_run_count(self):
        ledger = RunLedger(MemoryDocumentStorage())
        await ledger.record_run("sample", CONFIG, {"records_p0.csv": "aa"})
        record = await ledger.record_run("sample", CONFIG, {"records_p0.csv": "aa"})
        assert record.run_count == 2
        assert record.mismatches == []

    @pytest.mark.asyncio
    async def test_different_digest_should_raise_and_be_remembered(self):
        storage = MemoryDocumentStorage()
        ledger = RunLedger(storage)
        await ledger.record_run("sample", CONFIG, {"records_p0.csv": "aa"})
        with pytest.raises(ReproducibilityMismatch):
            await ledger.record_run("sample", CONFIG, {"records_p0.csv": "bb"})
        stored = await ledger.find_one({"fingerprint": fingerprint("sample", CONFIG)})
        assert stored.mismatches == ["records_p0.csv"]
        assert stored.output_digests == {"records_p0.csv": "aa"}
        assert len(storage.documents) == 1

    @pytest.mark.asyncio
    async def test_messages_should_go_to_a_per_command_logger(self, caplog):
        ledger = RunLedger(MemoryDocumentStorage())
        with caplog.at_level(logging.INFO, logger="entcon.ledger.RunLedger"):
            await ledger.record_run("sweep", CONFIG, {"sweep.csv": "aa"})
        names = {r.name for r in caplog.records if r.name.startswith("entcon.ledger")}
        assert names == {"entcon.ledger.RunLedger.sweep"}

    @pytest.mark.asyncio
    async def test_other_configurations_should_be_independent(self):
        ledger = RunLedger(MemoryDocumentStorage())
        await ledger.record_run("sample", CONFIG, {"x.csv": "aa"})
        record = await ledger.record_run(
            "sample", {**CONFIG, "seed": 1}, {"x.csv": "bb"}
        )
        assert record.run_count == 1
        assert await ledger.remove({"command": "sample"}) == 2


class TestUnQLiteDocumentStorage:
    @pytest.mark.asyncio
    async def test_ledger_should_persist_in_unqlite(self, tmp_path):
        unqlite = pytest.importorskip("unqlite")
        path = str(tmp_path / "ledger.db")
        ledger = RunLedger(UnQLiteDocumentStorage(unqlite.UnQLite(path), "runs"))
        await ledger.record_run("sweep", CONFIG, {"sweep.csv": "aa"})
        ledger.close()

        reopened = RunLedger(UnQLiteDocumentStorage(unqlite.UnQLite(path), "runs"))
        try:
            record = await reopened.record_run("sweep", CONFIG, {"sweep.csv": "aa"})
            assert record.run_count == 2
            assert record.config == CONFIG
            with pytest.raises(ReproducibilityMismatch):
                await reopened.record_run("sweep", CONFIG, {"sweep.csv": "cc"})
        finally:
            reopened.close()

    @pytest.mark.asyncio
    async def test_in_memory_database_should_support_find_and_remove(self):
        unqlite = pytest.importorskip("unqlite")
        storage = UnQLiteDocumentStorage(unqlite.UnQLite(":mem:"), "docs")
        try:
            await storage.store({"name": "a", "value": 1})
            await storage.store({"name": "b", "value": 2})
            found = [doc async for doc in storage.find({"name": "b"})]
            assert len(found) == 1 and found[0]["value"] == 2
            assert await storage.update_one({"name": "a"}, {"name": "a", "value": 3})
            assert (await storage.find_one({"name": "a"}))["value"] == 3
            assert await storage.remove({"name": "a"}) == 1
            assert await storage.find_one({"name": "a"}) is None
        finally:
            storage.close()
