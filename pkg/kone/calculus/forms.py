"""Monte Carlo estimators of the Dirichlet form and integration by parts.

The form is ``E(F, G) = E_mu[<gradK F, gradK G>]``. It is estimated
directly from samples of ``mu`` (:func:`energy_form_mc`) and, through the
Nguyen-Zessin identity, as a double integral over inserted atoms
(:func:`energy_form_nz`). :func:`ibp_check` tests
``E(F, G) = -E_mu[L F * G]`` on the same samples.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from kone.calculus.cylinder import CylinderFunction
from kone.calculus.generator import generator_apply, grad_atoms
from kone.errors import EmptySampleError, SupportError
from kone.measure.core import DiscreteMeasure, Window
from kone.parameters import N_SE
from kone.sampling.gibbs import filter_boundary, relative_energy
from kone.sampling.intensity import WeightDensity
from kone.sampling.potentials import PairPotential
from kone.types import EstimateReport, IbpReport, IdentityReport, Support
from kone.utils.rng import get_rng
from kone.verify.stats import identity_report, mean_se

logger = logging.getLogger(__name__)

__all__ = [
    "energy_density",
    "energy_form_check",
    "energy_form_mc",
    "energy_form_nz",
    "energy_samples",
    "ibp_check",
    "joint_support",
]


def _pointwise(grad_x_f, grad_s_f, grad_x_g, grad_s_g, s) -> np.ndarray:
    # written symmetrically in (F, G) so that swapping them is bit-exact
    position = np.sum(grad_x_f * grad_x_g, axis=1) / s
    return position + s * (grad_s_f * grad_s_g)


def energy_density(
    F: CylinderFunction,
    G: CylinderFunction,
    eta: DiscreteMeasure,
) -> float:
    """``<gradK F, gradK G>`` at ``eta``."""
    if len(eta) == 0:
        return 0.0
    grad_x_f, grad_s_f = grad_atoms(F, eta)
    grad_x_g, grad_s_g = grad_atoms(G, eta)
    return float(
        np.sum(
            _pointwise(grad_x_f, grad_s_f, grad_x_g, grad_s_g, eta.weights)
        )
    )


def energy_samples(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
) -> np.ndarray:
    return np.array([energy_density(F, G, eta) for eta in samples])


def energy_form_mc(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
) -> EstimateReport:
    """Sample mean of the tangent inner product of the gradients.

    Raises
    ------
    EmptySampleError
        If ``samples`` is empty.
    """
    if len(samples) == 0:
        raise EmptySampleError("energy_form_mc needs at least one sample")
    estimate, se = mean_se(energy_samples(F, G, samples))
    return {"estimate": estimate, "se": se}


def joint_support(*functions: CylinderFunction) -> Support:
    """Bounding box of the supports of all inner functions."""
    supports = [sup for F in functions for sup in F.supports]
    return Support(
        min(sup.s_lo for sup in supports),
        max(sup.s_hi for sup in supports),
        tuple(np.min([sup.lo for sup in supports], axis=0)),
        tuple(np.max([sup.hi for sup in supports], axis=0)),
    )


def _inserted_gradient(F: CylinderFunction, y: np.ndarray, s, x):
    """Gradient of ``F`` at ``eta + s delta_x`` with respect to the
    inserted atom, given the pairings ``y`` of ``eta``."""
    s_arr = np.array([s])
    x_arr = np.asarray(x, dtype=float)[None]
    jet = F.jet(s_arr, x_arr)
    dg = np.asarray(F.outer.grad(y + jet.value[:, 0]), dtype=float)
    grad_x = np.einsum("j,jnd->nd", dg, jet.grad_x)
    grad_s = dg @ jet.d_s
    return grad_x, grad_s


def _nz_values(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: Optional[PairPotential],
    s_min: float,
    rng: np.random.Generator,
    boundary: Optional[DiscreteMeasure],
    n_inner: int,
) -> np.ndarray:
    window = samples[0].window
    support = joint_support(F, G)
    if support.s_lo < s_min:
        raise SupportError(
            f"inner functions must vanish below s_min = {s_min}"
        )
    box = Window(support.lo, support.hi).intersect(window)
    if box is None:
        return np.zeros(len(samples))
    s_floor = max(s_min, support.s_lo)
    mass = density.sigma_mass(box, s_floor)
    if potential is not None:
        boundary = filter_boundary(window, boundary, potential.range)

    values = np.empty(len(samples))
    for k, eta in enumerate(samples):
        y_f = F.pairings(eta)
        y_g = G.pairings(eta)
        s, x = density.sample_points(box, s_floor, n_inner, rng)
        inner = np.empty(n_inner)
        for j in range(n_inner):
            energy = (
                0.0
                if potential is None
                else relative_energy(s[j], x[j], eta, potential, boundary)
            )
            gx_f, gs_f = _inserted_gradient(F, y_f, s[j], x[j])
            gx_g, gs_g = _inserted_gradient(G, y_g, s[j], x[j])
            bracket = _pointwise(gx_f, gs_f, gx_g, gs_g, s[j : j + 1])[0]
            inner[j] = np.exp(-energy) * bracket
        values[k] = mass * float(np.mean(inner))
    return values


def energy_form_nz(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    s_min: float,
    potential: Optional[PairPotential] = None,
    rng: Optional[np.random.Generator] = None,
    boundary: Optional[DiscreteMeasure] = None,
    n_inner: int = 1,
) -> EstimateReport:
    """The form rewritten as an integral over inserted atoms.

    ``E(F, G) = E_mu[int l(s, x) exp(-s int phi(x, .) d eta)
    ((1/s^2) <grad_x F, grad_x G> + d_s F d_s G) ds dx]`` with the
    gradients taken at the inserted atom of ``eta + s delta_x``. The inner
    integral is estimated by importance sampling ``n_inner`` points per
    sample from the truncated intensity on the joint support of the inner
    functions.

    Raises
    ------
    SupportError
        If an inner function is supported below ``s_min``.
    EmptySampleError
        If ``samples`` is empty.
    """
    if len(samples) == 0:
        raise EmptySampleError("energy_form_nz needs at least one sample")
    values = _nz_values(
        F,
        G,
        samples,
        density,
        potential,
        s_min,
        get_rng(rng),
        boundary,
        n_inner,
    )
    estimate, se = mean_se(values)
    return {"estimate": estimate, "se": se}


def energy_form_check(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    s_min: float,
    potential: Optional[PairPotential] = None,
    rng: Optional[np.random.Generator] = None,
    boundary: Optional[DiscreteMeasure] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> IdentityReport:
    """Compare the direct and the inserted-atom estimators of the form on
    the same samples."""
    if len(samples) == 0:
        raise EmptySampleError("energy_form_check needs at least one sample")
    direct = energy_samples(F, G, samples)
    dual = _nz_values(
        F,
        G,
        samples,
        density,
        potential,
        s_min,
        get_rng(rng),
        boundary,
        n_inner,
    )
    return identity_report(direct, dual, n_se=n_se)


def _check_interior(support: Support, window: Window, s_min: float):
    if support.s_lo <= s_min:
        raise SupportError(
            f"inner functions must vanish below s_min = {s_min}"
        )
    if window.periodic:
        return
    if np.any(np.asarray(support.lo) <= np.asarray(window.lo)) or np.any(
        np.asarray(support.hi) >= np.asarray(window.hi)
    ):
        raise SupportError(
            "inner functions must be supported inside the window"
        )


def ibp_check(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: Optional[PairPotential] = None,
    boundary: Optional[DiscreteMeasure] = None,
    s_min: Optional[float] = None,
    n_se: float = N_SE,
) -> IbpReport:
    """Integration by parts ``E(F, G) + E_mu[L F * G] = 0``.

    Both terms are averaged over the same samples and the residual is
    judged against the standard error of the per-sample sum.

    Raises
    ------
    SupportError
        If ``s_min`` is given and an inner function reaches the weight
        truncation or the boundary of a non-periodic window; there the
        boundary terms of the integration by parts do not vanish.
    EmptySampleError
        If ``samples`` is empty.
    """
    if len(samples) == 0:
        raise EmptySampleError("ibp_check needs at least one sample")
    window = samples[0].window
    if s_min is not None:
        _check_interior(joint_support(F, G), window, s_min)
    if potential is not None:
        boundary = filter_boundary(window, boundary, potential.range)
    form = energy_samples(F, G, samples)
    pairing = np.array(
        [
            generator_apply(F, eta, density, potential, boundary) * G(eta)
            for eta in samples
        ]
    )
    residual, se = mean_se(form + pairing)
    logger.debug("ibp residual %g (se %g)", residual, se)
    return {
        "E_form": float(np.mean(form)),
        "pairing": float(np.mean(pairing)),
        "residual": residual,
        "se": se,
        "pass": bool(abs(residual) <= n_se * se),
    }
