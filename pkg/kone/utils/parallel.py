"""Replica-parallel Monte Carlo.

Replicas receive their own seed sequence and return partial results;
only the caller combines them.
"""
import logging
from typing import Callable, List, Optional, TypeVar

import numpy as np
from joblib import Parallel, delayed

from kone.parameters import get_num_threads
from kone.utils.rng import spawn_seeds

logger = logging.getLogger(__name__)

T = TypeVar("T")

__all__ = [
    "map_replicas",
    "split_counts",
]


def split_counts(total: int, n_chunks: int) -> List[int]:
    """Split ``total`` into ``n_chunks`` near-equal nonnegative parts."""
    base, extra = divmod(total, n_chunks)
    return [base + (1 if i < extra else 0) for i in range(n_chunks)]


def map_replicas(
    func: Callable[[np.random.Generator, int], T],
    seed: int,
    n_replicas: int,
    n_jobs: Optional[int] = None,
) -> List[T]:
    """Run ``func(rng, index)`` for each replica with independent streams.

    The streams depend on ``seed`` and the replica index only, so results
    are identical for any worker count. Results are returned in replica
    order.
    """
    if n_jobs is None:
        n_jobs = get_num_threads()
    seeds = spawn_seeds(seed, n_replicas)

    def run(index: int):
        return func(np.random.default_rng(seeds[index]), index)

    if n_jobs == 1 or n_replicas <= 1:
        return [run(i) for i in range(n_replicas)]
    logger.debug("running %d replicas on %d workers", n_replicas, n_jobs)
    return list(
        Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(run)(i) for i in range(n_replicas)
        )
    )
