"""Counter-based seeding and order-fixed parallel reduction.

Trials are split into fixed-size blocks; block ``b`` draws from
``SeedSequence(seed, spawn_key=(stream, b))``.  Because the partition and the
streams depend only on ``(seed, trials)``, results are identical for any
worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

BLOCK = 4096
T = TypeVar("T")


def generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def worker_count() -> int:
    env = os.environ.get("FREQCAP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def blocks(trials: int, block: int = BLOCK) -> list[tuple[int, int]]:
    """``(block_index, size)`` pairs covering ``trials``."""
    out = []
    b = 0
    while b * block < trials:
        out.append((b, min(block, trials - b * block)))
        b += 1
    return out


def map_blocks(
    fn: Callable[[np.random.Generator, int, int], T],
    trials: int,
    seed: int,
    stream: int = 0,
    block: int = BLOCK,
) -> list[T]:
    """Apply ``fn(rng, block_index, size)`` to every block, results in block order."""
    tasks = blocks(trials, block)

    def run(task: tuple[int, int]) -> T:
        b, size = task
        return fn(generator(seed, stream, b), b, size)

    workers = min(worker_count(), len(tasks)) if tasks else 1
    if workers <= 1:
        return [run(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, tasks))
