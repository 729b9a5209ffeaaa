"""Range splitting for nogil kernels.

Kernels write disjoint per-vertex outputs, so splitting a vertex range
across threads never changes results, only wall time.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    env = os.environ.get("GWCUT_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def split_range(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total)) if total else 1
    step = total / parts
    bounds = [round(i * step) for i in range(parts + 1)]
    bounds[-1] = total
    return [(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


def run_split(worker, total: int, threads: int | None = None) -> None:
    """Call worker(lo, hi) over a partition of range(total), possibly threaded."""
    threads = default_threads() if threads is None else max(1, threads)
    ranges = split_range(total, threads)
    if len(ranges) <= 1:
        if total:
            worker(0, total)
        return
    with ThreadPoolExecutor(len(ranges)) as pool:
        futures = [pool.submit(worker, lo, hi) for lo, hi in ranges]
        for f in futures:
            f.result()
