"""Order-preserving parallel map capped by ``COLLAPSE_BUDGET_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "COLLAPSE_BUDGET_THREADS"


def worker_count(requested=None) -> int:
    if requested is not None:
        n = int(requested)
    else:
        raw = os.environ.get(ENV_THREADS, "")
        try:
            n = int(raw) if raw.strip() else (os.cpu_count() or 1)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    return max(1, n)


def ordered_map(fn, items, workers=None) -> list:
    """``[fn(x) for x in items]``, possibly computed concurrently; order is kept."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
