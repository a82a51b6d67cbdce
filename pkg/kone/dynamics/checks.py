"""Statistical checks of the diffusion against the Gibbs measure.

- :func:`stationarity_check` evolves equilibrium samples and compares the
  laws of observables at times 0 and T.
- :func:`reversibility_check` compares ``E[F(eta_0) G(eta_T)]`` with
  ``E[G(eta_0) F(eta_T)]``.
- :func:`generator_consistency` compares one-step increments of the
  integrator with the generator for decreasing time steps.

The time-discretisation bias is estimated by rerunning with ``2 dt``: the
first order bias at ``dt`` is about the difference of the two runs.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from kone.calculus.cylinder import CylinderFunction, LinearOuter
from kone.calculus.generator import generator_apply, generator_terms
from kone.dynamics.integrator import (
    SimulationState,
    drifts,
    em_step,
    em_update,
)
from kone.errors import EmptySampleError
from kone.measure.core import DiscreteMeasure
from kone.parameters import (
    ALPHA_LEVEL,
    DEFAULT_DIFFUSION_PARAMETERS,
    N_SE,
)
from kone.sampling.intensity import WeightDensity
from kone.sampling.potentials import PairPotential
from kone.types import (
    DiffusionParams,
    GeneratorConsistencyReport,
    Observable,
    ReversibilityReport,
    StationarityReport,
)
from kone.utils.parallel import map_replicas
from kone.utils.rng import derive_seed
from kone.verify.stats import fit_log_slope, ks_two_sample, mean_se

logger = logging.getLogger(__name__)

__all__ = [
    "DTS",
    "SLOPE_RANGE",
    "evolve",
    "evolve_samples",
    "generator_consistency",
    "reversibility_check",
    "stationarity_check",
]

DTS = (4e-3, 2e-3, 1e-3)

SLOPE_RANGE = (0.7, 1.3)


def evolve(
    eta: DiscreteMeasure,
    density: WeightDensity,
    potential: Optional[PairPotential],
    params: DiffusionParams,
    rng: np.random.Generator,
    boundary: Optional[DiscreteMeasure] = None,
) -> Tuple[DiscreteMeasure, float]:
    """Evolve ``eta`` up to time ``T``; returns the final measure and the
    weight reflection rate."""
    state = SimulationState(
        eta, density, potential, params, rng=rng, boundary=boundary
    )
    n_steps = int(round(params["T"] / params["dt"])) if params["dt"] else 0
    for _ in range(n_steps):
        em_step(state)
    return state.measure(), state.reflection_rate


def evolve_samples(
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: Optional[PairPotential],
    params: DiffusionParams,
    seed: int,
    boundary: Optional[DiscreteMeasure] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[List[DiscreteMeasure], float]:
    """Evolve every sample with its own stream; returns the final measures
    and the mean reflection rate."""

    def run(rng, index):
        eta = samples[index]
        return evolve(eta, density, potential, params, rng, boundary)

    results = map_replicas(run, seed, len(samples), n_jobs)
    finals = [final for final, _ in results]
    rate = float(np.mean([rate for _, rate in results])) if results else 0.0
    return finals, rate


def _coarse(params: DiffusionParams) -> DiffusionParams:
    return {**params, "dt": 2.0 * params["dt"]}


def stationarity_check(
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: Optional[PairPotential],
    observables: Sequence[Observable],
    params: Optional[DiffusionParams] = None,
    seed: int = 0,
    boundary: Optional[DiscreteMeasure] = None,
    richardson: bool = True,
    n_se: float = N_SE,
    n_jobs: Optional[int] = None,
) -> List[StationarityReport]:
    """Compare observables of equilibrium samples before and after time T.

    For each observable the two-sample Kolmogorov-Smirnov test and the
    paired mean difference are reported. A check passes when the p-value
    exceeds the 1% level and the mean drift lies within ``n_se`` standard
    errors plus the discretisation bias budget.

    Raises
    ------
    EmptySampleError
        If ``samples`` is empty.
    """
    if len(samples) == 0:
        raise EmptySampleError("stationarity_check needs samples")
    params = {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})}
    finals, rate = evolve_samples(
        samples, density, potential, params, seed, boundary, n_jobs
    )
    coarse = None
    if richardson and params["T"] > 0 and params["dt"] > 0:
        coarse, _ = evolve_samples(
            samples,
            density,
            potential,
            _coarse(params),
            derive_seed(seed, "coarse"),
            boundary,
            n_jobs,
        )

    reports: List[StationarityReport] = []
    for observable in observables:
        start = np.array([observable(eta) for eta in samples])
        end = np.array([observable(eta) for eta in finals])
        statistic, pvalue = ks_two_sample(start, end)
        mean_0 = float(np.mean(start))
        mean_t = float(np.mean(end))
        _, se = mean_se(end - start)
        budget = 0.0
        if coarse is not None:
            budget = abs(
                mean_t - float(np.mean([observable(eta) for eta in coarse]))
            )
        passed = pvalue > ALPHA_LEVEL and abs(mean_t - mean_0) <= (
            n_se * se + budget
        )
        reports.append(
            {
                "observable": observable.name,
                "ks_statistic": statistic,
                "ks_pvalue": pvalue,
                "mean_0": mean_0,
                "mean_T": mean_t,
                "se": se,
                "bias_budget": budget,
                "reflection_rate": rate,
                "pass": bool(passed),
            }
        )
        logger.debug(
            "%s: mean %.5g -> %.5g, ks p=%.3g",
            observable.name,
            mean_0,
            mean_t,
            pvalue,
        )
    return reports


def _cross_products(F, G, samples, finals):
    start_f = np.array([F(eta) for eta in samples])
    start_g = np.array([G(eta) for eta in samples])
    end_f = np.array([F(eta) for eta in finals])
    end_g = np.array([G(eta) for eta in finals])
    return start_f * end_g, start_g * end_f


def reversibility_check(
    F: CylinderFunction,
    G: CylinderFunction,
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: Optional[PairPotential],
    params: Optional[DiffusionParams] = None,
    seed: int = 0,
    boundary: Optional[DiscreteMeasure] = None,
    richardson: bool = True,
    n_se: float = N_SE,
    n_jobs: Optional[int] = None,
) -> ReversibilityReport:
    """Symmetry ``E[F(eta_0) G(eta_T)] = E[G(eta_0) F(eta_T)]``.

    Both products are taken on the same evolved samples, so ``F = G`` and
    ``T = 0`` give a difference of exactly zero.
    """
    if len(samples) == 0:
        raise EmptySampleError("reversibility_check needs samples")
    params = {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})}
    finals, _ = evolve_samples(
        samples, density, potential, params, seed, boundary, n_jobs
    )
    fg, gf = _cross_products(F, G, samples, finals)
    difference, se = mean_se(fg - gf)
    budget = 0.0
    if richardson and params["T"] > 0 and params["dt"] > 0:
        coarse, _ = evolve_samples(
            samples,
            density,
            potential,
            _coarse(params),
            derive_seed(seed, "coarse"),
            boundary,
            n_jobs,
        )
        fg_c, gf_c = _cross_products(F, G, samples, coarse)
        budget = abs(difference - float(np.mean(fg_c - gf_c)))
    return {
        "fg": float(np.mean(fg)),
        "gf": float(np.mean(gf)),
        "difference": difference,
        "se": se,
        "bias_budget": budget,
        "pass": bool(abs(difference) <= n_se * se + budget),
    }


def _second_order_part(F, eta, density, potential, boundary) -> float:
    terms = generator_terms(F, eta, density, potential, boundary)
    return float(np.sum(terms["laplace_x"]) + np.sum(terms["laplace_s"]))


def _increment_mc(
    F: CylinderFunction,
    state: SimulationState,
    second_order: float,
    n_replicas: int,
    rng: np.random.Generator,
):
    """Antithetic increments with a second order control variate.

    The antithetic pair removes the terms odd in the noise; the quadratic
    term of the pure noise step is replaced by its exact mean.
    """
    dt = state.dt
    s = state.weights
    x = state.positions
    f0 = F.at(s, x)
    amp_x = np.sqrt(2.0 * dt / s)[:, None]
    amp_s = np.sqrt(2.0 * s * dt)
    values = np.empty(n_replicas)
    for k in range(n_replicas):
        xi_x = rng.standard_normal(x.shape)
        xi_s = rng.standard_normal(len(s))
        x_p, s_p, _, _ = em_update(state, xi_x, xi_s)
        x_m, s_m, _, _ = em_update(state, -xi_x, -xi_s)
        step = 0.5 * (F.at(s_p, x_p) + F.at(s_m, x_m)) - f0
        quadratic = (
            0.5
            * (
                F.at(s + amp_s * xi_s, x + amp_x * xi_x)
                + F.at(s - amp_s * xi_s, x - amp_x * xi_x)
            )
            - f0
        )
        values[k] = (step - quadratic + dt * second_order) / dt
    return mean_se(values)


def _increment_quadrature(
    F: CylinderFunction,
    state: SimulationState,
    n_nodes: int,
):
    """Exact expectation of one step for a linear cylinder function by
    tensor Gauss-Hermite quadrature; reflections are ignored."""
    outer = F.outer
    dt = state.dt
    s = state.weights
    x = state.positions
    dim = x.shape[1]
    nodes, weights = hermite_e.hermegauss(n_nodes)
    weights = weights / np.sqrt(2.0 * np.pi)
    grid = np.stack(
        np.meshgrid(*([nodes] * (dim + 1)), indexing="ij"), axis=-1
    ).reshape(-1, dim + 1)
    grid_w = np.prod(
        np.stack(
            np.meshgrid(*([weights] * (dim + 1)), indexing="ij"), axis=-1
        ).reshape(-1, dim + 1),
        axis=1,
    )
    b_x, b_s = drifts(state)
    f0 = F.at(s, x)
    expected = outer.offset
    for i in range(len(s)):
        s_q = s[i] + b_s[i] * dt + np.sqrt(2.0 * s[i] * dt) * grid[:, 0]
        x_q = (
            x[i] + b_x[i] * dt + np.sqrt(2.0 * dt / s[i]) * grid[:, 1:]
        )
        inside = s_q > 0
        for coeff, phi in zip(outer.coeffs, F.inner):
            values = np.zeros(len(grid_w))
            values[inside] = phi(s_q[inside], x_q[inside])
            expected += coeff * float(np.dot(grid_w, values))
    return (expected - f0) / dt, 0.0


def generator_consistency(
    F: CylinderFunction,
    eta: DiscreteMeasure,
    density: WeightDensity,
    potential: Optional[PairPotential] = None,
    dts: Sequence[float] = DTS,
    n_replicas: int = 2000,
    seed: int = 0,
    method: str = "mc",
    boundary: Optional[DiscreteMeasure] = None,
    n_nodes: int = 32,
    params: Optional[DiffusionParams] = None,
) -> GeneratorConsistencyReport:
    """Short-time consistency of the integrator with the generator.

    For each time step the mean one-step increment
    ``(E[F(eta_dt)] - F(eta)) / dt`` is compared with ``L F(eta)``. The
    error should decrease linearly in ``dt``; the check passes when the
    fitted log-log slope lies in ``[0.7, 1.3]``.

    Parameters
    ----------
    method : {"mc", "quadrature"}
        ``"mc"`` averages ``n_replicas`` antithetic pairs with a second
        order control variate. ``"quadrature"`` integrates the Gaussian
        step exactly and needs a linear outer function.
    """
    if method not in ("mc", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "quadrature" and not isinstance(F.outer, LinearOuter):
        raise ValueError("quadrature needs a linear cylinder function")
    generator = generator_apply(F, eta, density, potential, boundary)
    second_order = _second_order_part(F, eta, density, potential, boundary)
    rng = np.random.default_rng(seed)
    base = {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})}
    estimates, ses = [], []
    for dt in dts:
        state = SimulationState(
            eta,
            density,
            potential,
            {**base, "dt": dt},
            rng=rng,
            boundary=boundary,
            allow_1d=True,
        )
        if method == "mc":
            estimate, se = _increment_mc(
                F, state, second_order, n_replicas, rng
            )
        else:
            estimate, se = _increment_quadrature(F, state, n_nodes)
        estimates.append(float(estimate))
        ses.append(float(se))
    errors = [abs(e - generator) for e in estimates]
    slope = fit_log_slope(dts, errors)
    logger.debug(
        "generator %g, errors %s, slope %.3f", generator, errors, slope
    )
    return {
        "generator": generator,
        "dts": list(dts),
        "estimates": estimates,
        "errors": errors,
        "ses": ses,
        "slope": slope,
        "pass": bool(SLOPE_RANGE[0] <= slope <= SLOPE_RANGE[1]),
    }
