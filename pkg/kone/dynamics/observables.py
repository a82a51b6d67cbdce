"""Scalar observables recorded along trajectories."""
from typing import Optional

from kone.measure.core import DiscreteMeasure, Window, pair_hat
from kone.sampling.gibbs import hamiltonian_local
from kone.sampling.potentials import PairPotential
from kone.types import TestFunction

__all__ = [
    "AtomCount",
    "BoxMass",
    "CylinderObservable",
    "Energy",
    "Pairing",
    "parse_observables",
]


class AtomCount:
    name = "count"

    def __call__(self, eta: DiscreteMeasure) -> float:
        return float(len(eta))


class BoxMass:
    """``eta(box)``."""

    def __init__(self, box: Window, name: str = ""):
        self.box = box
        self.name = name or f"mass[{box.to_string()}]"

    def __call__(self, eta: DiscreteMeasure) -> float:
        if len(eta) == 0:
            return 0.0
        mask = self.box.contains(eta.positions)
        return float(eta.weights[mask].sum())


class Energy:
    """Relative energy of the configuration."""

    name = "energy"

    def __init__(
        self,
        potential: PairPotential,
        boundary: Optional[DiscreteMeasure] = None,
    ):
        self.potential = potential
        self.boundary = boundary

    def __call__(self, eta: DiscreteMeasure) -> float:
        return hamiltonian_local(eta, self.boundary, self.potential)


class Pairing:
    """``<<phi, eta>>`` for a test function."""

    def __init__(self, phi: TestFunction, name: str = ""):
        self.phi = phi
        self.name = name or f"pairing[{getattr(phi, 'name', 'phi')}]"

    def __call__(self, eta: DiscreteMeasure) -> float:
        return pair_hat(self.phi, eta)


class CylinderObservable:
    """Value of a cylinder function."""

    def __init__(self, F, name: str = ""):
        self.F = F
        self.name = name or F.name

    def __call__(self, eta: DiscreteMeasure) -> float:
        return float(self.F(eta))


def parse_observables(
    spec: str,
    window: Window,
    potential: Optional[PairPotential] = None,
):
    """Observables from a comma separated list.

    Known names are ``count``, ``mass`` (the whole window), ``energy``
    and ``inner`` (mass of the central half of the window).
    """
    lo = window.lo
    hi = window.hi
    quarter = tuple((h - l) / 4 for l, h in zip(lo, hi))
    inner = Window(
        tuple(l + q for l, q in zip(lo, quarter)),
        tuple(h - q for h, q in zip(hi, quarter)),
    )
    known = {
        "count": lambda: AtomCount(),
        "mass": lambda: BoxMass(window, "mass"),
        "inner": lambda: BoxMass(inner, "inner"),
        "energy": lambda: Energy(potential) if potential else None,
    }
    out = []
    for name in (part.strip() for part in spec.split(",")):
        if not name:
            continue
        if name not in known:
            raise ValueError(
                f"unknown observable {name!r}; expected one of "
                f"{', '.join(sorted(known))}"
            )
        observable = known[name]()
        if observable is None:
            raise ValueError("the energy observable needs a potential")
        out.append(observable)
    return out
