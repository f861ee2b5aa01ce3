"""Order-preserving parallel map capped by ``CTNN_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    env = os.environ.get("CTNN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn, items, threads=None):
    items = list(items)
    threads = threads or max_threads()
    if threads <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
