"""Order-preserving fan-out over worker processes."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Iterable, jobs: Optional[int] = 1) -> List:
    """``[fn(x) for x in items]``; results come back in input order regardless of ``jobs``."""
    items = list(items)
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
