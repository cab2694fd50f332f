"""Ordered thread-pool map.

The worker count comes from the ``threads`` argument or the
``INSTBOOT_THREADS`` environment variable; 0 means one per CPU.  Results
always come back in input order, and every task carries its own derived
seed, so output does not depend on the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "INSTBOOT_THREADS"


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        try:
            threads = int(os.environ.get(ENV_VAR, "1"))
        except ValueError:
            threads = 1
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    n = min(thread_count(threads), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
