"""Seed-derived random streams.

Every stochastic routine takes a ``numpy.random.Generator``. Independent
streams for replicas are spawned from one ``SeedSequence`` so that runs
are reproducible regardless of how replicas are scheduled on workers.
"""
import hashlib
from typing import List, Optional, Union

import numpy as np

__all__ = [
    "derive_seed",
    "get_rng",
    "spawn_generators",
    "spawn_seeds",
]


def get_rng(
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> np.random.Generator:
    """Return ``rng`` if given, otherwise a fresh generator from ``seed``."""
    if rng is not None:
        return rng
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, n: int) -> List[np.random.SeedSequence]:
    """``n`` independent child seed sequences of ``seed``."""
    return np.random.SeedSequence(seed).spawn(n)


def spawn_generators(seed: int, n: int) -> List[np.random.Generator]:
    return [np.random.default_rng(child) for child in spawn_seeds(seed, n)]


def derive_seed(seed: int, salt: Union[str, int]) -> int:
    """Deterministic 64-bit sub-seed of ``seed`` for a named component."""
    digest = hashlib.sha256(f"{seed}-{salt}".encode()).hexdigest()
    return int(digest, 16) % (2**63 - 1)
