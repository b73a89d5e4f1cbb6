"""Trial-parallel execution with bit-for-bit deterministic reductions.

Work is split into fixed-size chunks keyed by trial index; chunk
boundaries depend only on the configuration, never on the worker count,
and results are combined in chunk order (pairwise tree).  Serial and
parallel runs therefore produce identical floating-point output.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested=None):
    """Effective worker count, capped by the SHEARSEP_THREADS env var."""
    w = requested if requested else min(4, os.cpu_count() or 1)
    env = os.environ.get("SHEARSEP_THREADS")
    if env:
        w = min(w, max(1, int(env)))
    return max(1, int(w))


def chunk_ranges(n_items, chunk_size):
    return [(lo, min(lo + chunk_size, n_items)) for lo in range(0, n_items, chunk_size)]


def map_chunks(fn, n_items, chunk_size, workers=None):
    """Apply fn(lo, hi) over fixed chunks; results come back in chunk order."""
    ranges = chunk_ranges(n_items, chunk_size)
    w = worker_count(workers)
    if w == 1 or len(ranges) == 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def tree_reduce(items, combine):
    """Pairwise reduction in a fixed index-keyed tree order."""
    items = list(items)
    if not items:
        raise ValueError("nothing to reduce")
    while len(items) > 1:
        nxt = [combine(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]
