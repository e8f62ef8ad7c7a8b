"""Deterministic chunked execution over an index range."""
from concurrent.futures import ThreadPoolExecutor


def chunk_bounds(start, stop, parts):
    """Split ``range(start, stop)`` into at most ``parts`` contiguous pieces."""
    total = max(stop - start, 0)
    parts = max(1, min(parts, total or 1))
    step, extra = divmod(total, parts)
    out, lo = [], start
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def map_chunks(fn, start, stop, threads=1):
    """Apply ``fn(lo, hi)`` to contiguous chunks and return results in range order.

    Output order never depends on completion order, so callers that reduce
    the list left to right get thread-count independent results.
    """
    bounds = chunk_bounds(start, stop, threads)
    if threads <= 1 or len(bounds) == 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
