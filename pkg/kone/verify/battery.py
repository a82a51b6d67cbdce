"""Named batteries of functionals, cylinder functions and observables.

Everything is built relative to a window: test functions are supported
around its centre, away from its boundary, so the same battery serves the
Mecke, Nguyen-Zessin and integration by parts checks.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from kone.calculus.bumps import ProductBump
from kone.calculus.cylinder import (
    CylinderFunction,
    GaussianOuter,
    LinearOuter,
    ProductOuter,
    TanhOuter,
)
from kone.dynamics.observables import AtomCount, BoxMass, Energy, Pairing
from kone.measure.core import DiscreteMeasure, Window
from kone.sampling.potentials import PairPotential
from kone.types import Support

__all__ = [
    "BATTERIES",
    "Campbell",
    "LaplaceWeighted",
    "MassTimesIndicator",
    "NeighbourMass",
    "OtherAtomsDecay",
    "battery_bumps",
    "cylinder_pairs",
    "default_observables",
    "mecke_battery",
    "nz_battery",
]

BATTERIES = ("default", "linear")

# weight range of the battery test functions
S_RANGE = (0.05, 2.0)


class Campbell:
    """``F(s, x, eta) = f(s, x)``."""

    def __init__(self, f: ProductBump, name: str = "campbell"):
        self.f = f
        self.name = name
        self.support = f.support

    def __call__(self, s, x, eta):
        return self.f(s, x)


def _box_indicator(support: Support, s, x) -> np.ndarray:
    x = np.atleast_2d(x)
    inside = (np.asarray(s) >= support.s_lo) & (np.asarray(s) <= support.s_hi)
    inside &= np.all(
        (x >= np.asarray(support.lo)) & (x <= np.asarray(support.hi)), axis=1
    )
    return inside.astype(float)


class MassTimesIndicator:
    """``F(s, x, eta) = s * eta(region) * chi(s, x)`` with ``chi`` the
    indicator of the support box."""

    def __init__(
        self,
        support: Support,
        region: Window,
        name: str = "mass_indicator",
    ):
        self.support = support
        self.region = region
        self.name = name

    def __call__(self, s, x, eta):
        mass = 0.0
        if len(eta):
            inside = self.region.contains(eta.positions)
            mass = float(eta.weights[inside].sum())
        return np.asarray(s) * mass * _box_indicator(self.support, s, x)


class LaplaceWeighted:
    """``F(s, x, eta) = f(s, x) exp(-<<g, eta>>)``."""

    def __init__(self, f: ProductBump, g: ProductBump, name: str = "laplace"):
        self.f = f
        self.g = g
        self.name = name
        self.support = f.support

    def __call__(self, s, x, eta):
        total = float(np.sum(self.g(eta.weights, eta.positions))) if len(
            eta
        ) else 0.0
        return self.f(s, x) * np.exp(-total)


def _ball_masses(x, eta: DiscreteMeasure, radius: float):
    """Mass and number of atoms of ``eta`` within ``radius`` of each row
    of ``x``."""
    x = np.atleast_2d(x)
    if len(eta) == 0:
        return np.zeros(len(x)), np.zeros(len(x))
    delta = eta.window.displacement(x[:, None, :], eta.positions[None, :, :])
    close = np.sum(delta * delta, axis=-1) <= radius**2
    return close @ eta.weights, close.sum(axis=1).astype(float)


class NeighbourMass:
    """``F(s, x, eta) = f(s, x) m / (1 + m)`` with ``m = eta(B(x, r))``."""

    def __init__(self, f: ProductBump, radius: float, name: str = "nbr_mass"):
        self.f = f
        self.radius = radius
        self.name = name
        self.support = f.support

    def __call__(self, s, x, eta):
        mass, _ = _ball_masses(x, eta, self.radius)
        return self.f(s, x) * mass / (1.0 + mass)


class OtherAtomsDecay:
    """``F(s, x, eta) = f(s, x) exp(-(N(x, r) - 1))`` with ``N`` the number
    of atoms within ``r`` of ``x``, the atom at ``x`` included."""

    def __init__(self, f: ProductBump, radius: float, name: str = "others"):
        self.f = f
        self.radius = radius
        self.name = name
        self.support = f.support

    def __call__(self, s, x, eta):
        _, count = _ball_masses(x, eta, self.radius)
        return self.f(s, x) * np.exp(-np.maximum(count - 1.0, 0.0))


def _centre_box(
    window: Window,
    fraction: float,
    shift: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.asarray(window.lo)
    hi = np.asarray(window.hi)
    centre = 0.5 * (lo + hi) + shift * (hi - lo)
    half = 0.5 * fraction * (hi - lo)
    return centre - half, centre + half


def battery_bumps(window: Window) -> Dict[str, ProductBump]:
    """Three test functions supported in the middle of ``window``."""
    lo_a, hi_a = _centre_box(window, 0.25)
    lo_b, hi_b = _centre_box(window, 0.2, shift=0.03)
    lo_c, hi_c = _centre_box(window, 0.15, shift=-0.04)
    return {
        "a": ProductBump.box(S_RANGE, lo_a, hi_a, name="a"),
        "b": ProductBump.box((0.1, 3.0), lo_b, hi_b, power=1.0, name="b"),
        "c": ProductBump.box(
            (0.05, 1.0), lo_c, hi_c, amplitude=2.0, name="c"
        ),
    }


def mecke_battery(window: Window) -> List:
    """Functionals for the Mecke identity."""
    bumps = battery_bumps(window)
    f = bumps["a"]
    return [
        Campbell(f),
        MassTimesIndicator(f.support, window),
        LaplaceWeighted(f, bumps["b"]),
    ]


def nz_battery(window: Window, range: float) -> List:
    """Five functionals for the Nguyen-Zessin identity.

    The spatial support shrinks so that it stays farther than ``range``
    from the boundary of non-periodic windows.
    """
    bumps = battery_bumps(window)
    f = bumps["a"]
    if not window.periodic:
        lo = np.asarray(window.lo) + 1.05 * range
        hi = np.asarray(window.hi) - 1.05 * range
        if np.any(hi <= lo):
            raise ValueError(
                f"window {window.to_string()} is too small for "
                f"functionals supported {range} away from its boundary"
            )
        sup = f.support
        lo = np.maximum(lo, sup.lo)
        hi = np.minimum(hi, sup.hi)
        f = ProductBump.box((sup.s_lo, sup.s_hi), lo, hi, name="a")
    radius = 0.5 * range
    return [
        Campbell(f),
        MassTimesIndicator(f.support, window),
        LaplaceWeighted(f, bumps["b"]),
        NeighbourMass(f, radius),
        OtherAtomsDecay(f, radius),
    ]


def _cylinders(window: Window) -> Dict[str, CylinderFunction]:
    bumps = battery_bumps(window)
    a, b, c = bumps["a"], bumps["b"], bumps["c"]
    return {
        "lin_a": CylinderFunction(LinearOuter([1.0]), [a], name="lin_a"),
        "lin_ab": CylinderFunction(
            LinearOuter([1.0, -0.5], offset=0.25), [a, b], name="lin_ab"
        ),
        "lin_c": CylinderFunction(LinearOuter([0.7]), [c], name="lin_c"),
        "tanh_b": CylinderFunction(TanhOuter([0.5]), [b], name="tanh_b"),
        "gauss_c": CylinderFunction(
            GaussianOuter([0.5], 1.0), [c], name="gauss_c"
        ),
        "prod_ac": CylinderFunction(ProductOuter(2), [a, c], name="prod_ac"),
    }


def cylinder_pairs(
    window: Window,
    battery: str = "default",
) -> List[Tuple[CylinderFunction, CylinderFunction]]:
    """Six ``(F, G)`` pairs of cylinder functions.

    ``"linear"`` uses linear outer functions only; ``"default"`` mixes
    linear, tanh, Gaussian and product outer functions.
    """
    F = _cylinders(window)
    if battery == "linear":
        names = [
            ("lin_a", "lin_a"),
            ("lin_a", "lin_ab"),
            ("lin_ab", "lin_c"),
            ("lin_c", "lin_a"),
            ("lin_ab", "lin_ab"),
            ("lin_c", "lin_ab"),
        ]
    elif battery == "default":
        names = [
            ("lin_a", "lin_ab"),
            ("lin_ab", "tanh_b"),
            ("tanh_b", "gauss_c"),
            ("gauss_c", "prod_ac"),
            ("prod_ac", "lin_a"),
            ("tanh_b", "tanh_b"),
        ]
    else:
        raise ValueError(
            f"unknown battery {battery!r}; expected one of "
            f"{', '.join(BATTERIES)}"
        )
    return [(F[f], F[g]) for f, g in names]


def default_observables(
    window: Window,
    potential: Optional[PairPotential] = None,
) -> List:
    """Atom count, mass of the central box, a pairing and the energy."""
    lo, hi = _centre_box(window, 0.5)
    observables = [
        AtomCount(),
        BoxMass(Window(tuple(lo), tuple(hi)), name="inner_mass"),
        Pairing(battery_bumps(window)["a"], name="pairing_a"),
    ]
    if potential is not None and not potential.is_zero:
        observables.append(Energy(potential))
    return observables
