"""Chunked execution of nogil kernels over a thread pool."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def run_chunked(fn, n: int, threads: int | None = 1, chunk: int = 256) -> None:
    """Call ``fn(i0, i1)`` over disjoint ranges covering ``[0, n)``.

    ``fn`` must write only to its own output slots; results are then
    independent of the thread count and schedule.
    """
    threads = resolve_threads(threads)
    if threads == 1 or n <= chunk:
        fn(0, n)
        return
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in bounds]:
            fut.result()
