from __future__ import annotations

from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[..., R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """Ordered map; ``jobs > 1`` runs in worker processes via joblib."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=jobs)(delayed(func)(x) for x in items)


def child_seeds(seed: int, count: int, key: tuple[int, ...] = ()) -> list[np.random.SeedSequence]:
    """Independent per-task seeds; task i gets the same stream whatever the worker count."""
    return np.random.SeedSequence(seed, spawn_key=key).spawn(count)
