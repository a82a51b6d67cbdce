"""Discrete measures, marked configurations and their pairings.

A discrete measure is a finite sum of weighted Dirac masses
``eta = sum_i s_i delta_{x_i}`` restricted to an axis-aligned window. The
equivalent marked configuration is the set of points ``(s_i, x_i)`` in
``R_+ x R^d``. Both are immutable; modifying operations return new
objects.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from kone.errors import InvalidMeasureError

__all__ = [
    "DiscreteMeasure",
    "MarkedConfiguration",
    "Window",
    "from_configuration",
    "local_mass",
    "pair",
    "pair_hat",
    "to_configuration",
]


@dataclass(frozen=True)
class Window:
    """Axis-aligned box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``.

    When ``periodic`` is set the box is a torus: displacements use the
    minimum image convention and positions are wrapped into ``[lo, hi)``.
    """

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    periodic: bool = False

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) == 0:
            raise InvalidMeasureError(
                f"window bounds must have equal positive length, "
                f"got {len(lo)} and {len(hi)}"
            )
        if any(not h > l for l, h in zip(lo, hi)):
            raise InvalidMeasureError(f"empty window {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(
        cls,
        dim: int,
        lo: float = 0.0,
        hi: float = 1.0,
        periodic: bool = False,
    ) -> "Window":
        return cls((lo,) * dim, (hi,) * dim, periodic=periodic)

    @classmethod
    def ball_box(cls, k: float, dim: int) -> "Window":
        """The box B(k) = [-k, k]^d centred at the origin."""
        return cls.cube(dim, -k, k)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Boolean mask of the rows of ``x`` lying in the closed box."""
        x = np.atleast_2d(x)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((x >= lo) & (x <= hi), axis=-1)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Map positions into ``[lo, hi)``; the identity if not periodic."""
        if not self.periodic:
            return x
        lo = np.asarray(self.lo)
        wrapped = lo + np.mod(x - lo, self.lengths)
        # mod can round up to exactly the length
        return np.where(wrapped >= np.asarray(self.hi), lo, wrapped)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vector ``y - x``, minimum image when periodic."""
        delta = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        if self.periodic:
            lengths = self.lengths
            delta = delta - lengths * np.round(delta / lengths)
        return delta

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.displacement(x, y), axis=-1)

    def distance_to_boundary(self, x: np.ndarray) -> np.ndarray:
        """Euclidean distance from interior points to the box boundary."""
        x = np.atleast_2d(x)
        if self.periodic:
            return np.full(x.shape[0], np.inf)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.min(np.minimum(x - lo, hi - x), axis=-1)

    def intersect(self, other: "Window") -> Optional["Window"]:
        """Intersection of two boxes; ``None`` if it has no volume."""
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(not h > l for l, h in zip(lo, hi)):
            return None
        return Window(lo, hi)

    def expand(self, margin: float) -> "Window":
        lo = tuple(v - margin for v in self.lo)
        hi = tuple(v + margin for v in self.hi)
        return Window(lo, hi, periodic=False)

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def to_string(self) -> str:
        text = ",".join(
            f"{l!r}..{h!r}" for l, h in zip(self.lo, self.hi)
        )
        if self.periodic:
            text += ",periodic"
        return text

    @classmethod
    def from_string(cls, text: str) -> "Window":
        """Parse ``lo..hi,lo..hi[,periodic]``."""
        parts = [p.strip() for p in text.strip().split(",") if p.strip()]
        periodic = False
        if parts and parts[-1] == "periodic":
            periodic = True
            parts = parts[:-1]
        lo, hi = [], []
        for part in parts:
            try:
                left, right = part.split("..")
                lo.append(float(left))
                hi.append(float(right))
            except ValueError as err:
                raise ValueError(
                    f"could not parse window axis {part!r}; "
                    "expected lo..hi"
                ) from err
        return cls(tuple(lo), tuple(hi), periodic=periodic)


def _check_atoms(positions: np.ndarray, weights: np.ndarray):
    if positions.ndim != 2:
        raise InvalidMeasureError(
            f"positions must have shape (n, d), got {positions.shape}"
        )
    if weights.shape != (positions.shape[0],):
        raise InvalidMeasureError(
            f"expected {positions.shape[0]} weights, got {weights.shape}"
        )
    if not np.all(np.isfinite(positions)):
        raise InvalidMeasureError("positions must be finite")
    if not np.all(np.isfinite(weights)):
        raise InvalidMeasureError("weights must be finite")
    if np.any(weights <= 0):
        raise InvalidMeasureError("weights must be strictly positive")
    n = positions.shape[0]
    if n > 1 and np.unique(positions, axis=0).shape[0] != n:
        raise InvalidMeasureError("atom positions must be distinct")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite discrete measure ``sum_i s_i delta_{x_i}`` on a window.

    Parameters
    ----------
    positions : np.ndarray
        Atom positions, shape (n, d).
    weights : np.ndarray
        Strictly positive atom weights, shape (n,).
    window : Window
        Box containing every atom.
    meta : dict
        Sampler metadata (truncation level, ignored mass, ...). Not part
        of equality.
    """

    positions: np.ndarray
    weights: np.ndarray
    window: Window
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float, copy=True)
        weights = np.array(self.weights, dtype=float, copy=True)
        if positions.size == 0:
            positions = positions.reshape(0, self.window.dim)
        _check_atoms(positions, weights)
        if positions.shape[1] != self.window.dim:
            raise InvalidMeasureError(
                f"positions have dimension {positions.shape[1]}, "
                f"window has dimension {self.window.dim}"
            )
        if not np.all(self.window.contains(positions)):
            raise InvalidMeasureError("atoms must lie inside the window")
        positions.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empty(cls, window: Window, **meta) -> "DiscreteMeasure":
        return cls(np.zeros((0, window.dim)), np.zeros(0), window, meta)

    def __len__(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (
            self.window == other.window
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore

    @property
    def dim(self) -> int:
        return self.window.dim

    def total_mass(self) -> float:
        """Local mass ``eta(window)``."""
        mass = float(np.sum(self.weights))
        if not np.isfinite(mass):
            raise InvalidMeasureError("local mass is not finite")
        return mass

    def add_atom(self, s: float, x: Sequence[float]) -> "DiscreteMeasure":
        """Return ``eta + s delta_x``."""
        x = np.asarray(x, dtype=float).reshape(1, self.dim)
        return DiscreteMeasure(
            np.vstack([self.positions, x]),
            np.append(self.weights, float(s)),
            self.window,
            dict(self.meta),
        )

    def remove_atom(self, index: int) -> "DiscreteMeasure":
        """Return ``eta - s_i delta_{x_i}``."""
        keep = np.ones(len(self), dtype=bool)
        keep[index] = False
        return DiscreteMeasure(
            self.positions[keep],
            self.weights[keep],
            self.window,
            dict(self.meta),
        )

    def restrict(self, box: Window) -> "DiscreteMeasure":
        """Atoms lying in ``box``, as a measure on ``box``."""
        mask = box.contains(self.positions)
        return DiscreteMeasure(
            self.positions[mask],
            self.weights[mask],
            box,
            dict(self.meta),
        )

    def with_atoms(
        self,
        positions: np.ndarray,
        weights: np.ndarray,
    ) -> "DiscreteMeasure":
        return DiscreteMeasure(positions, weights, self.window, self.meta)


@dataclass(frozen=True, eq=False)
class MarkedConfiguration:
    """Finite set of marked points ``(s_i, x_i)`` in ``R_+ x R^d``.

    The optional window remembers where the configuration came from so
    that the round trip through :func:`from_configuration` is exact.
    """

    weights: np.ndarray
    positions: np.ndarray
    window: Optional[Window] = None

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float, copy=True)
        weights = np.array(self.weights, dtype=float, copy=True)
        if positions.ndim == 1 and positions.size == 0:
            dim = self.window.dim if self.window is not None else 1
            positions = positions.reshape(0, dim)
        _check_atoms(positions, weights)
        positions.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkedConfiguration):
            return NotImplemented
        return (
            self.window == other.window
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def points(self):
        """Iterate over ``(s, x)`` pairs."""
        for s, x in zip(self.weights, self.positions):
            yield float(s), x


def to_configuration(eta: DiscreteMeasure) -> MarkedConfiguration:
    """Marked configuration ``{(s_i, x_i)}`` of a discrete measure."""
    return MarkedConfiguration(eta.weights, eta.positions, eta.window)


def from_configuration(gamma: MarkedConfiguration) -> DiscreteMeasure:
    """Discrete measure ``sum_i s_i delta_{x_i}`` of a configuration.

    Without a stored window the bounding box of the points is used.

    Raises
    ------
    InvalidMeasureError
        If two points share a position.
    """
    window = gamma.window
    if window is None:
        if len(gamma) == 0:
            window = Window.cube(gamma.dim)
        else:
            lo = gamma.positions.min(axis=0)
            hi = gamma.positions.max(axis=0)
            hi = np.where(hi > lo, hi, lo + 1.0)
            window = Window(tuple(lo), tuple(hi))
    return DiscreteMeasure(gamma.positions, gamma.weights, window)


def pair_hat(
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
    eta: DiscreteMeasure,
) -> float:
    """``sum_x phi(s_x, x)`` over the atoms of ``eta``.

    ``phi`` is vectorised: it takes weights of shape (n,) and positions
    of shape (n, d).
    """
    if len(eta) == 0:
        return 0.0
    return float(np.sum(phi(eta.weights, eta.positions)))


def pair(
    f: Callable[[np.ndarray], np.ndarray],
    eta: DiscreteMeasure,
) -> float:
    """``<f, eta> = sum_i s_i f(x_i)`` for a vectorised ``f``."""
    if len(eta) == 0:
        return 0.0
    return float(np.dot(eta.weights, f(eta.positions)))


def local_mass(gamma: MarkedConfiguration, box: Window) -> float:
    """Sum of the marks of the points of ``gamma`` lying in ``box``."""
    if len(gamma) == 0:
        return 0.0
    mask = box.contains(gamma.positions)
    return float(np.sum(gamma.weights[mask]))
