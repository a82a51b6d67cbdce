"""Gradient, square field and generator of cylinder functions.

For an atom ``(s_x, x)`` of ``eta`` the chain rule gives

    grad_x F = sum_j d_j g * grad_x phi_j(s_x, x)
    d_s F    = sum_j d_j g * d_s phi_j(s_x, x)

and the generator is the sum over atoms of six terms

    (1/s) Lap_x F + (1/s) <grad_x log l, grad_x F>
    - <sum_{k != x} s_k grad_x phi(x, x_k), grad_x F>
    + s Lap_s F + s (d_s log l) d_s F
    - (sum_{k != x} s_k phi(x, x_k)) s d_s F

where the Laplacians use the Hessian of ``g``.
"""
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from kone.calculus.cylinder import CylinderFunction, TangentVector
from kone.measure.core import DiscreteMeasure
from kone.sampling.gibbs import interaction_fields
from kone.sampling.intensity import WeightDensity
from kone.sampling.potentials import PairPotential

__all__ = [
    "FlowDerivative",
    "directional_derivative",
    "directional_derivative_fd",
    "generator_apply",
    "generator_apply_gamma",
    "generator_terms",
    "gradK",
    "grad_atoms",
    "square_field",
]

VectorField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], np.ndarray]


def _atoms(eta) -> Tuple[np.ndarray, np.ndarray]:
    return np.asarray(eta.weights, dtype=float), np.asarray(
        eta.positions, dtype=float
    )


def _first_order(F: CylinderFunction, s: np.ndarray, x: np.ndarray):
    jet = F.jet(s, x)
    y = jet.value.sum(axis=1)
    dg = np.asarray(F.outer.grad(y), dtype=float)
    grad_x = np.einsum("j,jnd->nd", dg, jet.grad_x)
    grad_s = dg @ jet.d_s
    return jet, y, dg, grad_x, grad_s


def grad_atoms(
    F: CylinderFunction,
    eta: DiscreteMeasure,
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-atom ``(grad_x F, d_s F)``, shapes ``(n, d)`` and ``(n,)``."""
    s, x = _atoms(eta)
    if len(s) == 0:
        return np.zeros((0, x.shape[1] if x.ndim == 2 else 0)), np.zeros(0)
    _, _, _, grad_x, grad_s = _first_order(F, s, x)
    return grad_x, grad_s


def gradK(F: CylinderFunction, eta: DiscreteMeasure) -> TangentVector:
    """The gradient ``((1/s_x) grad_x F, d_s F)`` as a tangent vector."""
    grad_x, grad_s = grad_atoms(F, eta)
    s = np.asarray(eta.weights, dtype=float)
    return TangentVector(grad_x / s[:, None], grad_s, s)


def square_field(F: CylinderFunction, eta) -> float:
    """``sum_x (1/s) |grad_x F|^2 + s |d_s F|^2``.

    Accepts a :class:`DiscreteMeasure` or a marked configuration.
    """
    grad_x, grad_s = grad_atoms(F, eta)
    if len(grad_s) == 0:
        return 0.0
    s = np.asarray(eta.weights, dtype=float)
    return float(
        np.sum(np.sum(grad_x * grad_x, axis=1) / s + s * grad_s * grad_s)
    )


def _check_differentiable(values: np.ndarray, what: str):
    bad = ~np.isfinite(values)
    if bad.ndim > 1:
        bad = np.any(bad, axis=tuple(range(1, bad.ndim)))
    if np.any(bad):
        raise ValueError(
            f"{what} is not finite at atom {int(np.argmax(bad))}; the "
            "weight density must be differentiable at every atom"
        )


def _second_order(jet, dg: np.ndarray, hess: np.ndarray):
    lap_x = np.einsum(
        "jk,jnd,knd->n", hess, jet.grad_x, jet.grad_x
    ) + dg @ jet.lap_x
    lap_s = np.einsum("jk,jn,kn->n", hess, jet.d_s, jet.d_s) + dg @ jet.d2_s
    return lap_x, lap_s


def generator_terms(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    density: WeightDensity,
    potential: Optional[PairPotential] = None,
    boundary: Optional[DiscreteMeasure] = None,
) -> Dict[str, np.ndarray]:
    """The six per-atom terms of the generator applied to ``F``.

    Raises
    ------
    ValueError
        If a log-derivative of the weight density is not finite at an
        atom.
    """
    s, x = _atoms(eta)
    names = (
        "laplace_x",
        "log_density_x",
        "interaction_x",
        "laplace_s",
        "log_density_s",
        "interaction_s",
    )
    if len(s) == 0:
        return {name: np.zeros(0) for name in names}
    jet, y, dg, grad_x, grad_s = _first_order(F, s, x)
    hess = np.asarray(F.outer.hess(y), dtype=float)
    lap_x, lap_s = _second_order(jet, dg, hess)

    d_log_s = np.asarray(density.d_log_s(s, x), dtype=float)
    grad_log_x = np.asarray(density.grad_log_x(s, x), dtype=float)
    _check_differentiable(d_log_s, "d/ds log l")
    _check_differentiable(grad_log_x, "grad_x log l")

    if potential is None:
        field = np.zeros_like(s)
        grad_field = np.zeros_like(x)
    else:
        field, grad_field = interaction_fields(
            s, x, eta.window, potential, boundary
        )
    return {
        "laplace_x": lap_x / s,
        "log_density_x": np.sum(grad_log_x * grad_x, axis=1) / s,
        "interaction_x": -np.sum(grad_field * grad_x, axis=1),
        "laplace_s": s * lap_s,
        "log_density_s": s * d_log_s * grad_s,
        "interaction_s": -field * s * grad_s,
    }


def generator_apply(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    density: WeightDensity,
    potential: Optional[PairPotential] = None,
    boundary: Optional[DiscreteMeasure] = None,
) -> float:
    """``L F(eta)`` for a weight density and an optional pair potential.

    ``potential=None`` (or a zero potential) gives the generator of the
    completely random measure itself. Interaction sums exclude the atom
    itself and include the boundary atoms within range.
    """
    terms = generator_terms(F, eta, density, potential, boundary)
    return float(sum(np.sum(term) for term in terms.values()))


def generator_apply_gamma(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    potential: Optional[PairPotential] = None,
    boundary: Optional[DiscreteMeasure] = None,
) -> float:
    """Generator for the gamma density ``l = exp(-s)``.

    The position log-derivative term vanishes and the weight terms
    reduce to ``s (Lap_s F - d_s F)``.
    """
    s, x = _atoms(eta)
    if len(s) == 0:
        return 0.0
    jet, y, dg, grad_x, grad_s = _first_order(F, s, x)
    hess = np.asarray(F.outer.hess(y), dtype=float)
    lap_x, lap_s = _second_order(jet, dg, hess)
    if potential is None:
        field = np.zeros_like(s)
        grad_field = np.zeros_like(x)
    else:
        field, grad_field = interaction_fields(
            s, x, eta.window, potential, boundary
        )
    per_atom = (
        lap_x / s
        - np.sum(grad_field * grad_x, axis=1)
        + s * (lap_s - grad_s)
        - field * s * grad_s
    )
    return float(np.sum(per_atom))


def directional_derivative(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    v: VectorField,
    h: ScalarField,
) -> float:
    """``<gradK F, (v, h)>`` at ``eta``."""
    s, x = _atoms(eta)
    if len(s) == 0:
        return 0.0
    direction = TangentVector(
        np.asarray(v(x), dtype=float).reshape(x.shape),
        np.asarray(h(x), dtype=float).reshape(s.shape),
        s,
    )
    return gradK(F, eta).inner(direction)


class FlowDerivative(NamedTuple):
    """Finite-difference derivative along a flow."""

    estimate: float
    """Richardson-extrapolated value from the two largest steps."""

    central: Sequence[float]
    """Central differences, one per step."""

    richardson: Sequence[float]
    """Extrapolations of consecutive pairs of steps."""


def directional_derivative_fd(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    v: VectorField,
    h: ScalarField,
    steps: Sequence[float] = (1e-3, 1e-4, 1e-5),
) -> FlowDerivative:
    """Derivative of ``F`` along ``x -> x + t v(x)``, ``s -> exp(t h(x)) s``.

    Central differences at each step are combined by Richardson
    extrapolation, which removes the second order error term.
    """
    s, x = _atoms(eta)
    if len(s) == 0:
        return FlowDerivative(0.0, [0.0] * len(steps), [])
    dx = np.asarray(v(x), dtype=float).reshape(x.shape)
    ds = np.asarray(h(x), dtype=float).reshape(s.shape)

    def flowed(t):
        return F.at(np.exp(t * ds) * s, x + t * dx)

    central = [(flowed(t) - flowed(-t)) / (2.0 * t) for t in steps]
    richardson = []
    for (t0, d0), (t1, d1) in zip(
        zip(steps, central), zip(steps[1:], central[1:])
    ):
        ratio2 = (t0 / t1) ** 2
        richardson.append((ratio2 * d1 - d0) / (ratio2 - 1.0))
    estimate = richardson[0] if richardson else central[0]
    return FlowDerivative(float(estimate), central, richardson)
