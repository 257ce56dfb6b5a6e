"""Seeding and worker-pool helpers."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def rng_for(*key) -> np.random.Generator:
    """Deterministic generator derived from a hierarchical key.

    The key parts are joined into a string and hashed, so the stream depends
    only on the key values, never on call order. Distinct keys give
    independent streams.
    """
    digest = hashlib.sha256("/".join(str(k) for k in key).encode()).digest()
    words = np.frombuffer(digest, dtype=np.uint64)
    return np.random.default_rng(list(words))


def resolve_workers(requested: int | None) -> int:
    """Worker count, with the QMLA_WORKERS env var taking precedence."""
    env = os.environ.get("QMLA_WORKERS")
    if env is not None:
        return max(1, int(env))
    if requested is None:
        return 1
    return max(1, int(requested))


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Map fn over items, preserving input order.

    Tasks must be independent and carry their own seeded rngs; with
    workers > 1 they run on a thread pool (numpy releases the GIL in the
    heavy linear algebra), and results are still merged in input order, so
    output is identical to the serial path.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
