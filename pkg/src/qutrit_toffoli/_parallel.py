"""Deterministic helpers for optional thread-level parallelism.

Results are always reduced in task-submission order and every stochastic
task derives its generator from (master seed, task index), so the output
is byte-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

THREADS_ENV = "QUTRIT_TOFFOLI_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if count < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {count}")
    return count


def deterministic_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map ``fn`` over ``items`` preserving order regardless of worker count."""
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def task_rng(master_seed: int, task_index: int) -> np.random.Generator:
    """Independent generator for one task; reproducible for any schedule."""
    return np.random.default_rng([int(master_seed), int(task_index)])
