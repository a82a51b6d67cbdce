"""Neighbour search for finite-range interactions.

:class:`CellList` is the mutable index used by the Markov chain: atoms are
binned in cubic cells of side at least the interaction range so that a
neighbour query only visits the ``3^d`` surrounding cells. Small systems
fall back to a brute-force scan. :func:`neighbour_pairs` enumerates all
interacting pairs of a fixed point set with a k-d tree.
"""
import itertools
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from scipy.spatial import cKDTree

from kone.measure.core import Window
from kone.parameters import BRUTE_FORCE_BELOW

__all__ = [
    "CellList",
    "cross_pairs",
    "neighbour_pairs",
]

Key = Tuple[int, ...]


class CellList:
    """Cell index of atoms labelled by integer ids.

    Parameters
    ----------
    window : Window
        Simulation box. For periodic windows the cells tile the torus.
    cutoff : float
        Interaction range.
    brute_force_below : int
        Scan all atoms when fewer than this many are indexed.
    """

    def __init__(
        self,
        window: Window,
        cutoff: float,
        brute_force_below: int = BRUTE_FORCE_BELOW,
    ):
        if not cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {cutoff}")
        self.window = window
        self.cutoff = float(cutoff)
        self.brute_force_below = brute_force_below
        self._origin = np.asarray(window.lo)
        if window.periodic:
            self._n_cells = np.maximum(
                np.floor(window.lengths / cutoff), 1
            ).astype(int)
            self._size = window.lengths / self._n_cells
        else:
            self._n_cells = None
            self._size = np.full(window.dim, self.cutoff)
        self._cells: Dict[Key, Set[int]] = {}
        self._keys: Dict[int, Key] = {}
        self._offsets = list(itertools.product((-1, 0, 1), repeat=window.dim))

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, index: int) -> bool:
        return index in self._keys

    def key(self, x: np.ndarray) -> Key:
        cell = np.floor((np.asarray(x) - self._origin) / self._size)
        cell = cell.astype(int)
        if self._n_cells is not None:
            cell = np.mod(cell, self._n_cells)
        return tuple(int(c) for c in cell)

    def insert(self, index: int, x: np.ndarray):
        key = self.key(x)
        self._cells.setdefault(key, set()).add(index)
        self._keys[index] = key

    def remove(self, index: int):
        key = self._keys.pop(index)
        members = self._cells[key]
        members.discard(index)
        if not members:
            del self._cells[key]

    def update(self, index: int, x: np.ndarray):
        key = self.key(x)
        if self._keys.get(index) == key:
            return
        self.remove(index)
        self.insert(index, x)

    def relabel(self, old: int, new: int):
        """Move the entry of ``old`` to the id ``new``."""
        key = self._keys.pop(old)
        members = self._cells[key]
        members.discard(old)
        members.add(new)
        self._keys[new] = key

    def candidates(self, x: np.ndarray) -> List[int]:
        """Ids in the cells surrounding ``x``, sorted."""
        if len(self._keys) < self.brute_force_below:
            return sorted(self._keys)
        centre = np.asarray(self.key(x))
        keys: Set[Key] = set()
        for offset in self._offsets:
            cell = centre + np.asarray(offset)
            if self._n_cells is not None:
                cell = np.mod(cell, self._n_cells)
            keys.add(tuple(int(c) for c in cell))
        found: List[int] = []
        for key in keys:
            found.extend(self._cells.get(key, ()))
        return sorted(found)

    def neighbours(
        self,
        x: np.ndarray,
        positions: np.ndarray,
        exclude: Optional[int] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Ids within the cutoff of ``x`` and their displacements.

        ``positions`` is indexed by id. The result is sorted by id so that
        sums over neighbours do not depend on the cell layout.
        """
        ids = [i for i in self.candidates(x) if i != exclude]
        if not ids:
            return np.zeros(0, dtype=int), np.zeros((0, self.window.dim))
        ids = np.asarray(ids, dtype=int)
        delta = self.window.displacement(x, positions[ids])
        close = np.sum(delta * delta, axis=1) <= self.cutoff**2
        return ids[close], delta[close]


def _tree(window: Window, positions: np.ndarray) -> cKDTree:
    if window.periodic:
        lengths = window.lengths
        shifted = np.mod(positions - np.asarray(window.lo), lengths)
        shifted = np.where(shifted >= lengths, 0.0, shifted)
        return cKDTree(shifted, boxsize=lengths)
    return cKDTree(positions)


def neighbour_pairs(
    window: Window,
    positions: np.ndarray,
    cutoff: float,
) -> np.ndarray:
    """All pairs ``i < j`` with distance at most ``cutoff``, sorted."""
    if len(positions) < 2:
        return np.zeros((0, 2), dtype=int)
    tree = _tree(window, positions)
    pairs = tree.query_pairs(cutoff, output_type="ndarray")
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=int)
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def cross_pairs(
    positions: np.ndarray,
    others: np.ndarray,
    cutoff: float,
) -> np.ndarray:
    """Pairs ``(i, b)`` of points of two non-periodic sets within range."""
    if len(positions) == 0 or len(others) == 0:
        return np.zeros((0, 2), dtype=int)
    lists = cKDTree(positions).query_ball_tree(cKDTree(others), cutoff)
    pairs = [(i, b) for i, found in enumerate(lists) for b in sorted(found)]
    if not pairs:
        return np.zeros((0, 2), dtype=int)
    return np.asarray(pairs, dtype=int)
