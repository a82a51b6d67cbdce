"""Finite-range radial pair potentials and the stability condition (C2).

All potentials are of the form ``phi(x, y) = psi(|x - y|)`` with
``psi(r) = 0`` for ``r > R``. Distances use the window's displacement, so
periodic windows get the minimum image convention.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline
from scipy.special import gamma as gamma_function

from kone.measure.cutoffs import smoothstep, smoothstep_derivative
from kone.measure.core import Window
from kone.types import C2Report

logger = logging.getLogger(__name__)

__all__ = [
    "AttractiveRing",
    "PairPotential",
    "SmoothstepRepulsion",
    "TabulatedRadial",
    "ZeroPotential",
    "c2_epsilon",
    "check_c2",
    "parse_potential",
    "unit_ball_volume",
]

GRID_SIZE = 4001


class PairPotential:
    """Symmetric radial pair potential with finite range.

    Attributes
    ----------
    range : float
        Interaction range R.
    delta : float
        Radius of the ball on which (C2) requires a positive core.
    """

    name = "potential"
    range: float
    delta: float

    def radial(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def radial_derivative(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return False

    def __call__(
        self,
        x: np.ndarray,
        y: np.ndarray,
        window: Optional[Window] = None,
    ) -> np.ndarray:
        delta = _displacement(x, y, window)
        return self.radial(np.linalg.norm(delta, axis=-1))

    def grad_x(
        self,
        x: np.ndarray,
        y: np.ndarray,
        window: Optional[Window] = None,
    ) -> np.ndarray:
        """``grad_x phi(x, y)``; zero at coinciding points."""
        delta = _displacement(x, y, window)
        r = np.linalg.norm(delta, axis=-1)
        slope = self.radial_derivative(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(r > 0, -slope / r, 0.0)
        return factor[..., None] * delta

    def _grid(self) -> Tuple[np.ndarray, np.ndarray]:
        r = np.linspace(0.0, self.range, GRID_SIZE)
        return r, self.radial(r)

    @property
    def sup_norm(self) -> float:
        _, values = self._grid()
        return float(np.max(np.abs(values)))

    @property
    def negative_sup_norm(self) -> float:
        _, values = self._grid()
        return float(max(0.0, -np.min(values)))


def _displacement(x, y, window):
    if window is not None:
        return window.displacement(x, y)
    return np.asarray(y, dtype=float) - np.asarray(x, dtype=float)


class SmoothstepRepulsion(PairPotential):
    """Nonnegative bump: ``height`` on ``[0, R/2]``, smoothstep down to 0
    at ``R``."""

    name = "repulsive"

    def __init__(
        self,
        height: float = 1.0,
        range: float = 1.0,
        delta: float = 0.25,
        order: int = 1,
    ):
        if not (height > 0 and range > 0 and delta > 0):
            raise ValueError("height, range and delta must be positive")
        self.height = float(height)
        self.range = float(range)
        self.delta = float(delta)
        self.order = order

    def __repr__(self):
        return (
            f"SmoothstepRepulsion(height={self.height}, "
            f"range={self.range}, delta={self.delta})"
        )

    def radial(self, r):
        half = 0.5 * self.range
        return self.height * smoothstep(
            (self.range - np.asarray(r, dtype=float)) / half, self.order
        )

    def radial_derivative(self, r):
        half = 0.5 * self.range
        return (
            -self.height
            / half
            * smoothstep_derivative(
                (self.range - np.asarray(r, dtype=float)) / half, self.order
            )
        )


class AttractiveRing(PairPotential):
    """Repulsive core with an attractive well.

    ``psi(r) = height * S((R/2 - r) / (R/6)) - depth * w(r)`` where the core
    is flat on ``[0, R/3]`` and the well ``w(r) = (1 - u^2)^2``,
    ``u = (r - 3R/4) / (R/4)``, lives on ``[R/2, R]``.
    """

    name = "ring"

    def __init__(
        self,
        height: float = 100.0,
        depth: float = 1.0,
        range: float = 1.0,
        delta: float = 0.25,
    ):
        if not (height > 0 and depth >= 0 and range > 0 and delta > 0):
            raise ValueError("invalid ring potential parameters")
        self.height = float(height)
        self.depth = float(depth)
        self.range = float(range)
        self.delta = float(delta)

    def __repr__(self):
        return (
            f"AttractiveRing(height={self.height}, depth={self.depth}, "
            f"range={self.range}, delta={self.delta})"
        )

    def _core_arg(self, r):
        return (0.5 * self.range - r) / (self.range / 6.0)

    def _well_arg(self, r):
        return (r - 0.75 * self.range) / (0.25 * self.range)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        core = smoothstep(self._core_arg(r))
        u = self._well_arg(r)
        well = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0)
        return self.height * core - self.depth * well

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        core = -smoothstep_derivative(self._core_arg(r)) / (self.range / 6.0)
        u = self._well_arg(r)
        well = np.where(
            np.abs(u) < 1.0,
            -4.0 * u * (1.0 - u * u) / (0.25 * self.range),
            0.0,
        )
        return self.height * core - self.depth * well


class TabulatedRadial(PairPotential):
    """Radial profile interpolated by a cubic spline.

    The table must end at ``r = R`` with value 0; the potential is 0
    beyond.
    """

    name = "table"

    def __init__(self, r: np.ndarray, values: np.ndarray, delta: float):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or r.size < 4:
            raise ValueError("need at least 4 matching (r, value) rows")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must start at 0 and increase")
        if values[-1] != 0.0:
            raise ValueError("tabulated potential must vanish at its range")
        self.range = float(r[-1])
        self.delta = float(delta)
        self._spline = CubicSpline(r, values, bc_type="clamped")
        self._derivative = self._spline.derivative()

    @classmethod
    def from_csv(cls, path: str, delta: float) -> "TabulatedRadial":
        """Read a table with columns ``r`` and ``phi``."""
        table = pd.read_csv(path)
        return cls(table["r"].values, table["phi"].values, delta)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(
            r <= self.range, self._spline(np.minimum(r, self.range)), 0.0
        )

    def radial_derivative(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(
            r <= self.range, self._derivative(np.minimum(r, self.range)), 0.0
        )


class ZeroPotential(PairPotential):
    """``phi = 0``. Reduces Gibbs quantities to the reference measure; it
    fails (C2) and is meant for test paths."""

    name = "zero"

    def __init__(self, range: float = 1.0, delta: float = 0.25):
        self.range = float(range)
        self.delta = float(delta)

    def __repr__(self):
        return "ZeroPotential()"

    @property
    def is_zero(self) -> bool:
        return True

    def radial(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def radial_derivative(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


def unit_ball_volume(dim: int) -> float:
    """``v_d = pi^{d/2} / Gamma(d/2 + 1)``."""
    return float(math.pi ** (dim / 2) / gamma_function(dim / 2 + 1))


def c2_epsilon(dim: int, range: float, delta: float) -> float:
    """``epsilon = 2 v_d d^{d/2} (R / delta + 1)``."""
    return 2.0 * unit_ball_volume(dim) * dim ** (dim / 2) * (
        range / delta + 1.0
    )


def check_c2(potential: PairPotential, dim: int) -> C2Report:
    """Check the stability condition (C2).

    The margin is the grid infimum of ``psi`` over ``[0, delta]`` minus
    ``epsilon`` times the sup-norm of the negative part of ``psi``.
    """
    epsilon = c2_epsilon(dim, potential.range, potential.delta)
    radii = np.linspace(0.0, potential.delta, GRID_SIZE)
    inf_phi = float(np.min(potential.radial(radii)))
    neg_norm = potential.negative_sup_norm
    margin = inf_phi - epsilon * neg_norm
    logger.debug(
        "C2 for %r in d=%d: epsilon=%g margin=%g",
        potential,
        dim,
        epsilon,
        margin,
    )
    return {
        "epsilon": epsilon,
        "margin": margin,
        "inf_phi": inf_phi,
        "neg_norm": neg_norm,
        "pass": bool(margin > 0),
    }


def parse_potential(spec: str) -> PairPotential:
    """Build a potential from ``family[:key=value,...]``.

    Families are ``repulsive``, ``ring``, ``zero`` and ``table`` (with a
    ``path`` key pointing at a CSV with columns ``r`` and ``phi``).

    Examples
    --------
    >>> parse_potential("repulsive:height=5,range=1,delta=0.25")
    SmoothstepRepulsion(height=5.0, range=1.0, delta=0.25)
    """
    family, _, rest = spec.partition(":")
    options = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(
                f"expected key=value in potential spec, got {item!r}"
            )
        options[key.strip()] = value.strip()
    family = family.strip()
    try:
        if family == "repulsive":
            return SmoothstepRepulsion(
                **{k: float(v) for k, v in options.items()}
            )
        if family == "ring":
            return AttractiveRing(**{k: float(v) for k, v in options.items()})
        if family == "zero":
            return ZeroPotential(**{k: float(v) for k, v in options.items()})
        if family == "table":
            return TabulatedRadial.from_csv(
                options["path"], float(options.get("delta", 0.25))
            )
    except (TypeError, KeyError) as err:
        raise ValueError(f"invalid potential spec {spec!r}: {err}") from err
    raise ValueError(f"unknown potential family {family!r}")
