"""Cylinder functions ``F(eta) = g(<<phi_1, eta>>, ..., <<phi_N, eta>>)``.

An outer function provides its value, gradient and Hessian; the inner test
functions provide exact first and second derivatives in the weight and
position of an atom (see :mod:`kone.calculus.bumps`).
"""
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from kone.measure.core import DiscreteMeasure
from kone.types import Support, TestFunction

__all__ = [
    "ConstantOuter",
    "CylinderFunction",
    "GaussianOuter",
    "InnerJet",
    "LinearOuter",
    "OuterFunction",
    "ProductOuter",
    "TangentVector",
    "TanhOuter",
]


class OuterFunction:
    """Smooth ``g: R^N -> R`` with gradient and Hessian."""

    name = "outer"

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LinearOuter(OuterFunction):
    """``g(y) = offset + <coeffs, y>``."""

    name = "linear"

    def __init__(self, coeffs: Sequence[float], offset: float = 0.0):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.offset = float(offset)

    def value(self, y):
        return self.offset + float(np.dot(self.coeffs, y))

    def grad(self, y):
        return self.coeffs.copy()

    def hess(self, y):
        n = len(self.coeffs)
        return np.zeros((n, n))


class ConstantOuter(OuterFunction):
    """``g(y) = c`` for ``N`` ignored arguments."""

    name = "constant"

    def __init__(self, c: float, n: int = 1):
        self.c = float(c)
        self.n = n

    def value(self, y):
        return self.c

    def grad(self, y):
        return np.zeros(self.n)

    def hess(self, y):
        return np.zeros((self.n, self.n))


class TanhOuter(OuterFunction):
    """``g(y) = tanh(<a, y>)``."""

    name = "tanh"

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = np.asarray(coeffs, dtype=float)

    def value(self, y):
        return float(np.tanh(np.dot(self.coeffs, y)))

    def grad(self, y):
        t = np.tanh(np.dot(self.coeffs, y))
        return (1.0 - t * t) * self.coeffs

    def hess(self, y):
        t = np.tanh(np.dot(self.coeffs, y))
        return -2.0 * t * (1.0 - t * t) * np.outer(self.coeffs, self.coeffs)


class GaussianOuter(OuterFunction):
    """``g(y) = exp(-|y - centre|^2 / (2 scale^2))``."""

    name = "gaussian"

    def __init__(self, centre: Sequence[float], scale: float = 1.0):
        self.centre = np.asarray(centre, dtype=float)
        self.scale = float(scale)

    def _parts(self, y):
        z = (np.asarray(y, dtype=float) - self.centre) / self.scale
        return z, float(np.exp(-0.5 * np.dot(z, z)))

    def value(self, y):
        return self._parts(y)[1]

    def grad(self, y):
        z, g = self._parts(y)
        return -g * z / self.scale

    def hess(self, y):
        z, g = self._parts(y)
        eye = np.eye(len(z))
        return g * (np.outer(z, z) - eye) / self.scale**2


class ProductOuter(OuterFunction):
    """``g(y) = prod_j y_j``."""

    name = "product"

    def __init__(self, n: int = 2):
        self.n = n

    def value(self, y):
        return float(np.prod(y))

    def grad(self, y):
        y = np.asarray(y, dtype=float)
        return np.array([np.prod(np.delete(y, j)) for j in range(self.n)])

    def hess(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros((self.n, self.n))
        for j in range(self.n):
            for k in range(self.n):
                if j != k:
                    out[j, k] = np.prod(np.delete(y, [j, k]))
        return out


class InnerJet(NamedTuple):
    """Inner test functions and their derivatives at each atom.

    Arrays are indexed ``[j, atom]`` (and ``[j, atom, axis]`` for
    gradients).
    """

    value: np.ndarray
    d_s: np.ndarray
    d2_s: np.ndarray
    grad_x: np.ndarray
    lap_x: np.ndarray


class CylinderFunction:
    """``F(eta) = g(<<phi_1, eta>>, ..., <<phi_N, eta>>)``.

    Parameters
    ----------
    outer : OuterFunction
        The outer function ``g``.
    inner : sequence of TestFunction
        Compactly supported test functions ``phi_j`` on ``R_+ x R^d``.
    name : str, optional
        Label used in reports.
    """

    def __init__(
        self,
        outer: OuterFunction,
        inner: Sequence[TestFunction],
        name: str = "",
    ):
        if not inner:
            raise ValueError("a cylinder function needs inner functions")
        self.outer = outer
        self.inner = tuple(inner)
        self.name = name or f"{outer.name}[{len(self.inner)}]"

    def __repr__(self):
        return f"CylinderFunction({self.name})"

    @property
    def n_inner(self) -> int:
        return len(self.inner)

    @property
    def supports(self) -> Sequence[Support]:
        return [phi.support for phi in self.inner]

    def pairings_at(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        """``(<<phi_j, eta>>)_j`` for the atoms ``(s, x)``."""
        if len(s) == 0:
            return np.zeros(self.n_inner)
        return np.array([float(np.sum(phi(s, x))) for phi in self.inner])

    def pairings(self, eta: DiscreteMeasure) -> np.ndarray:
        return self.pairings_at(eta.weights, eta.positions)

    def at(self, s: np.ndarray, x: np.ndarray) -> float:
        """Value on the atoms ``(s, x)`` without building a measure."""
        return float(self.outer.value(self.pairings_at(s, x)))

    def __call__(self, eta: DiscreteMeasure) -> float:
        return self.at(eta.weights, eta.positions)

    def jet(self, s: np.ndarray, x: np.ndarray) -> InnerJet:
        """Inner functions and derivatives at every atom."""
        return InnerJet(
            np.stack([phi(s, x) for phi in self.inner]),
            np.stack([phi.d_s(s, x) for phi in self.inner]),
            np.stack([phi.d2_s(s, x) for phi in self.inner]),
            np.stack([phi.grad_x(s, x) for phi in self.inner]),
            np.stack([phi.lap_x(s, x) for phi in self.inner]),
        )


@dataclass(frozen=True)
class TangentVector:
    """Element of the tangent space at ``eta``.

    One pair ``(v_x, h_x)`` per atom; ``weights`` are the atom weights of
    the reference measure, which weight the inner product
    ``sum_x s_x (<u_x, v_x> + a_x b_x)``.
    """

    v: np.ndarray
    h: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.v) != len(self.h) or len(self.h) != len(self.weights):
            raise ValueError("tangent vector fields must match the atoms")

    def __len__(self) -> int:
        return len(self.h)

    def inner(self, other: "TangentVector") -> float:
        if len(other) != len(self) or not np.array_equal(
            self.weights, other.weights
        ):
            raise ValueError("tangent vectors live at different measures")
        position = np.sum(self.v * other.v, axis=1)
        return float(np.sum(self.weights * (position + self.h * other.h)))

    def norm2(self) -> float:
        return self.inner(self)
