from concurrent.futures import ThreadPoolExecutor
from os import environ
from typing import Optional

_global_thread_pool_executor: Optional[ThreadPoolExecutor] = None
_max_workers: Optional[int] = None


def _workers_from_env() -> Optional[int]:
    value = environ.get("ENTCON_WORKERS", "")
    if value.strip().isdigit():
        return max(1, int(value))
    return None


def configure(max_workers: Optional[int]) -> None:
    """Set the worker count of the shared executor, replacing a running one."""
    global _max_workers
    shutdown()
    _max_workers = max_workers


def get() -> ThreadPoolExecutor:
    global _global_thread_pool_executor
    if not _global_thread_pool_executor:
        _global_thread_pool_executor = ThreadPoolExecutor(
            _max_workers or _workers_from_env(),
            "entcon.utils.global_thread_pool_executor",
        )
    return _global_thread_pool_executor


def shutdown() -> None:
    global _global_thread_pool_executor
    if _global_thread_pool_executor:
        _global_thread_pool_executor.shutdown(wait=True)
        _global_thread_pool_executor = None
