import asyncio
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import (
    Any,
    AsyncIterator,
    Awaitable,
    Dict,
    Generic,
    List,
    Optional,
    Type,
    TypeVar,
)

T = TypeVar("T")

Document = Dict[str, Any]


class RecordStorage(Generic[T]):
    def store(self, record: T) -> Awaitable[T]:
        ...

    def find(self, query: Document) -> AsyncIterator[T]:
        ...

    def find_one(self, query: Document) -> Awaitable[Optional[T]]:
        ...

    def update_one(self, query: Document, updated: T) -> Awaitable[Optional[T]]:
        ...

    def remove(self, query: Document) -> Awaitable[int]:
        ...


class DocumentStorage(RecordStorage[Document]):
    def close(self) -> None:
        pass


def doc_match(doc: Document, query: Document) -> bool:
    """True when every key of `query` is present in `doc` with an equal value."""
    return all(k in doc and doc[k] == v for k, v in query.items())


class RecordAdapter(Generic[T]):
    """Converts between records and the plain documents a `DocumentStorage` keeps."""

    def record2dict(self, record: T) -> Document:
        ...

    def dict2record(self, d: Document) -> T:
        ...


class DataclassRecordAdapter(RecordAdapter[T]):
    """A `RecordAdapter` for dataclasses. Unknown keys, like a backend's
    internal document id, are dropped before building the record.
    """

    def __init__(self, datacls: Type[T]) -> None:
        assert dataclasses.is_dataclass(datacls), "datacls should be a dataclass"
        self.datacls = datacls
        self.field_names = frozenset(f.name for f in dataclasses.fields(datacls))
        super().__init__()

    def dict2record(self, d: Document) -> T:
        fields = {k: v for k, v in d.items() if k in self.field_names}
        return self.datacls(**fields)  # type: ignore

    def record2dict(self, record: T) -> Document:
        return dataclasses.asdict(record)


class RecordStorageWrapper(RecordStorage[T]):
    """
    Wraps a `DocumentStorage` into a `RecordStorage` reading and writing records.
    Extend it for a concrete record type:

    ````
    class RunLedger(RecordStorageWrapper[LedgerRecord]):
        def __init__(self, storage: DocumentStorage) -> None:
            super().__init__(storage, DataclassRecordAdapter(LedgerRecord))
    ````
    """

    def __init__(self, storage: DocumentStorage, adapter: RecordAdapter[T]) -> None:
        self.storage = storage
        self.adapter = adapter
        super().__init__()

    async def store(self, record: T) -> T:
        result = await self.storage.store(self.adapter.record2dict(record))
        return self.adapter.dict2record(result)

    async def find(self, query: Document) -> AsyncIterator[T]:
        async for doc in self.storage.find(query):
            yield self.adapter.dict2record(doc)

    async def find_one(self, query: Document) -> Optional[T]:
        result = await self.storage.find_one(query)
        if result is None:
            return None
        return self.adapter.dict2record(result)

    async def update_one(self, query: Document, updated: T) -> Optional[T]:
        result = await self.storage.update_one(query, self.adapter.record2dict(updated))
        if result is None:
            return None
        return self.adapter.dict2record(result)

    async def remove(self, query: Document) -> int:
        return await self.storage.remove(query)


class MemoryDocumentStorage(DocumentStorage):
    """Keeps documents in a list. For tests and runs without a ledger file."""

    def __init__(self) -> None:
        self.documents: List[Document] = []
        super().__init__()

    async def store(self, record: Document) -> Document:
        self.documents.append(dict(record))
        return record

    async def find(self, query: Document) -> AsyncIterator[Document]:
        for doc in list(self.documents):
            if doc_match(doc, query):
                yield dict(doc)

    async def find_one(self, query: Document) -> Optional[Document]:
        async for doc in self.find(query):
            return doc
        return None

    async def update_one(
        self, query: Document, updated: Document
    ) -> Optional[Document]:
        for i, doc in enumerate(self.documents):
            if doc_match(doc, query):
                self.documents[i] = dict(updated)
                return updated
        return None

    async def remove(self, query: Document) -> int:
        kept = [doc for doc in self.documents if not doc_match(doc, query)]
        removed = len(self.documents) - len(kept)
        self.documents = kept
        return removed


def _decode(value: Any) -> Any:
    # unqlite hands strings back as bytes on some builds
    if isinstance(value, bytes):
        return value.decode("utf-8")
    if isinstance(value, dict):
        return {_decode(k): _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


class UnQLiteDocumentStorage(DocumentStorage):
    """A collection in an UnQLite database. Calls run on a single worker
    thread so the database handle is never used concurrently.
    """

    ID_KEY = "__id"

    def __init__(self, instance: Any, collection_name: str) -> None:
        self.executor = ThreadPoolExecutor(
            max_workers=1,
            thread_name_prefix="entcon.utils.storage.UnQLiteDocumentStorage.executor",
        )
        self.instance = instance
        self.collection_name = collection_name
        self.collection = instance.collection(collection_name)
        self.collection.create()
        super().__init__()

    def _run(self, fn: Any, *args: Any) -> Awaitable[Any]:
        return asyncio.get_running_loop().run_in_executor(self.executor, fn, *args)

    def _store_sync(self, record: Document) -> Document:
        self.collection.store(dict(record))
        return record

    def _filter_sync(self, query: Document) -> List[Document]:
        docs = [_decode(doc) for doc in self.collection.all() or []]
        return [doc for doc in docs if doc_match(doc, query)]

    def _update_sync(self, query: Document, updated: Document) -> Optional[Document]:
        for doc in self._filter_sync(query):
            self.collection.update(doc[self.ID_KEY], dict(updated))
            return updated
        return None

    def _remove_sync(self, query: Document) -> int:
        docs = self._filter_sync(query)
        for doc in docs:
            self.collection.delete(doc[self.ID_KEY])
        return len(docs)

    def store(self, record: Document) -> Awaitable[Document]:
        return self._run(self._store_sync, record)

    async def find(self, query: Document) -> AsyncIterator[Document]:
        for doc in await self._run(self._filter_sync, query):
            yield doc

    async def find_one(self, query: Document) -> Optional[Document]:
        docs = await self._run(self._filter_sync, query)
        return docs[0] if docs else None

    def update_one(
        self, query: Document, updated: Document
    ) -> Awaitable[Optional[Document]]:
        return self._run(self._update_sync, query, updated)

    def remove(self, query: Document) -> Awaitable[int]:
        return self._run(self._remove_sync, query)

    def close(self) -> None:
        self.executor.shutdown(wait=True)
        self.instance.close()
