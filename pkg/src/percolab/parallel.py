"""Trial-range parallelism with order-fixed aggregation."""
from __future__ import annotations

import multiprocessing as mp
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any


def chunk_ranges(n: int, workers: int, min_chunk: int = 1) -> list[range]:
    """Split ``range(n)`` into at most ``workers`` contiguous pieces."""
    workers = max(1, min(int(workers), max(1, n // max(1, min_chunk))))
    bounds = [n * k // workers for k in range(workers + 1)]
    return [range(bounds[k], bounds[k + 1]) for k in range(workers) if bounds[k + 1] > bounds[k]]


def map_chunks(fn: Callable[..., Any], args: Sequence[Any], trials: int, workers: int = 1) -> list[Any]:
    """Call ``fn(*args, start, stop)`` on contiguous trial ranges; results in trial order.

    Per-trial randomness is keyed by the trial index, so the concatenated
    result does not depend on ``workers``.
    """
    chunks = chunk_ranges(trials, workers)
    if len(chunks) <= 1:
        return [fn(*args, c.start, c.stop) for c in chunks]
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=len(chunks), mp_context=ctx) as ex:
        futures = [ex.submit(fn, *args, c.start, c.stop) for c in chunks]
        return [f.result() for f in futures]
