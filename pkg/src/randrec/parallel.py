"""Deterministic fan-out of row-independent kernel batches.

Every row of a batch depends only on its own seed, so splitting rows across
threads cannot change results; outputs are concatenated in row order.
Compiled kernels release the GIL, so threads run truly in parallel.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def default_workers():
    env = os.environ.get("RANDREC_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_rows(fn, n_rows, workers=None, min_chunk=256, align=1):
    """Evaluate ``fn(lo, hi)`` over contiguous row ranges and stack the results.

    With ``align > 1`` every range starts on a multiple of ``align``, so a
    caller reducing over fixed blocks of ``align`` rows sees the same blocks
    whatever the worker count.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if n_rows == 0:
        return fn(0, 0)
    n_chunks = min(max(1, math.ceil(n_rows / min_chunk)), 4 * workers)
    bounds = np.linspace(0, n_rows, n_chunks + 1).astype(np.int64)
    if align > 1:
        bounds = np.minimum((bounds + align - 1) // align * align, n_rows)
    spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1 or len(spans) == 1:
        parts = [fn(a, b) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), spans))
    return np.concatenate(parts, axis=0)
