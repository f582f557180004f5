"""Seeded substreams and an order-preserving parallel map.

Every random quantity in the package is drawn from a generator keyed by
``(seed, stream, index)``. Work items never share a generator, so the
number of workers cannot change any result.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# stream tags; never renumber, seeds in saved manifests depend on them
GENOTYPES = 1
EFFECTS = 2
NOISE = 3
FIXED_EFFECTS = 4
SUBSAMPLES = 5
BOOTSTRAP = 6
CALIBRATION = 7
STUDY = 8

THREADS_ENV = "SPARSEH2_THREADS"


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (stream, index) pair under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(func: Callable[[T], R], items: Iterable[T], workers: int | None = 1) -> list[R]:
    """Map ``func`` over ``items`` and return results in input order.

    Threads are used because the heavy kernels (BLAS, LAPACK, the numba
    coordinate descent) release the GIL.
    """
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def chunks(total: int, size: int) -> Sequence[tuple[int, int]]:
    """Fixed ``[start, stop)`` blocks; block layout depends only on ``size``."""
    return [(start, min(start + size, total)) for start in range(0, total, size)]
