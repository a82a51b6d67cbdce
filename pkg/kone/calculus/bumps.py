"""Compactly supported smooth test functions on ``R_+ x R^d``.

Test functions are products of one-dimensional polynomial bumps
``b(t) = (1 - u^2)^4``, ``u = (t - c) / w``, supported on ``[c - w, c + w]``.
All derivatives are exact.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from kone.types import Support

__all__ = [
    "Bump1D",
    "ProductBump",
]


@dataclass(frozen=True)
class Bump1D:
    """``(1 - ((t - centre) / width)^2)^4`` on ``|t - centre| < width``."""

    centre: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    @property
    def lo(self) -> float:
        return self.centre - self.width

    @property
    def hi(self) -> float:
        return self.centre + self.width

    def _u(self, t):
        u = (np.asarray(t, dtype=float) - self.centre) / self.width
        return u, np.clip(1.0 - u * u, 0.0, None)

    def value(self, t: np.ndarray) -> np.ndarray:
        _, v = self._u(t)
        return v**4

    def derivative(self, t: np.ndarray) -> np.ndarray:
        u, v = self._u(t)
        return -8.0 * u * v**3 / self.width

    def second_derivative(self, t: np.ndarray) -> np.ndarray:
        u, v = self._u(t)
        return 8.0 * v**2 * (7.0 * u * u - 1.0) / self.width**2


class ProductBump:
    """``amplitude * s^power * b_s(s) * prod_i b_i(x_i)``.

    Parameters
    ----------
    s_bump : Bump1D
        Bump in the weight; must be supported in ``s > 0``.
    x_bumps : sequence of Bump1D
        One bump per spatial axis.
    amplitude : float
        Constant factor.
    power : float
        Power of the weight factor.
    """

    def __init__(
        self,
        s_bump: Bump1D,
        x_bumps: Sequence[Bump1D],
        amplitude: float = 1.0,
        power: float = 0.0,
        name: str = "bump",
    ):
        if not s_bump.lo > 0:
            raise ValueError("the weight bump must be supported in s > 0")
        self.s_bump = s_bump
        self.x_bumps = tuple(x_bumps)
        self.amplitude = float(amplitude)
        self.power = float(power)
        self.name = name

    def __repr__(self):
        return (
            f"ProductBump(s={self.s_bump}, x={self.x_bumps}, "
            f"amplitude={self.amplitude}, power={self.power})"
        )

    @classmethod
    def box(
        cls,
        s_range: Tuple[float, float],
        lo: Sequence[float],
        hi: Sequence[float],
        amplitude: float = 1.0,
        power: float = 0.0,
        name: str = "bump",
    ) -> "ProductBump":
        """Bump supported on ``[s_lo, s_hi] x [lo, hi]``."""
        s_bump = Bump1D(
            0.5 * (s_range[0] + s_range[1]), 0.5 * (s_range[1] - s_range[0])
        )
        x_bumps = [
            Bump1D(0.5 * (a + b), 0.5 * (b - a)) for a, b in zip(lo, hi)
        ]
        return cls(s_bump, x_bumps, amplitude, power, name)

    @property
    def dim(self) -> int:
        return len(self.x_bumps)

    @property
    def support(self) -> Support:
        return Support(
            self.s_bump.lo,
            self.s_bump.hi,
            tuple(b.lo for b in self.x_bumps),
            tuple(b.hi for b in self.x_bumps),
        )

    def _weight_parts(self, s):
        s = np.asarray(s, dtype=float)
        p = self.power
        b = self.s_bump.value(s)
        db = self.s_bump.derivative(s)
        d2b = self.s_bump.second_derivative(s)
        if p == 0.0:
            return b, db, d2b
        sp = s**p
        value = sp * b
        first = p * s ** (p - 1) * b + sp * db
        second = (
            p * (p - 1) * s ** (p - 2) * b
            + 2.0 * p * s ** (p - 1) * db
            + sp * d2b
        )
        return value, first, second

    def _space_parts(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        values = np.column_stack(
            [b.value(x[:, i]) for i, b in enumerate(self.x_bumps)]
        )
        firsts = np.column_stack(
            [b.derivative(x[:, i]) for i, b in enumerate(self.x_bumps)]
        )
        seconds = np.column_stack(
            [b.second_derivative(x[:, i]) for i, b in enumerate(self.x_bumps)]
        )
        return values, firsts, seconds

    def _others(self, values: np.ndarray, axis: int) -> np.ndarray:
        return np.prod(np.delete(values, axis, axis=1), axis=1)

    def __call__(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        w, _, _ = self._weight_parts(s)
        values, _, _ = self._space_parts(x)
        return self.amplitude * w * np.prod(values, axis=1)

    def d_s(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        _, dw, _ = self._weight_parts(s)
        values, _, _ = self._space_parts(x)
        return self.amplitude * dw * np.prod(values, axis=1)

    def d2_s(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        _, _, d2w = self._weight_parts(s)
        values, _, _ = self._space_parts(x)
        return self.amplitude * d2w * np.prod(values, axis=1)

    def grad_x(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        w, _, _ = self._weight_parts(s)
        values, firsts, _ = self._space_parts(x)
        grad = np.empty_like(values)
        for axis in range(self.dim):
            grad[:, axis] = firsts[:, axis] * self._others(values, axis)
        return self.amplitude * w[:, None] * grad

    def lap_x(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        w, _, _ = self._weight_parts(s)
        values, _, seconds = self._space_parts(x)
        total = np.zeros(values.shape[0])
        for axis in range(self.dim):
            total += seconds[:, axis] * self._others(values, axis)
        return self.amplitude * w * total
