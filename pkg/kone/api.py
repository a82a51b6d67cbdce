"""Python API for kone.

This module gathers the samplers, the diffusion integrator and the
verifiers behind a few functions with sensible defaults.

Example
-------
Sample the gamma measure on the unit square, truncated at weight 0.001:

>>> import kone.api as api
>>> window = api.get_window("0..1,0..1")
>>> samples = api.sample_crm(api.get_density("gamma"), window, n=10, seed=1)

Check the Mecke identity for the built-in battery of functionals. Each
report holds the two sides of the identity, their standard errors and a
``pass`` flag:

>>> reports = api.verify_mecke(window=window, n=1000, seed=1)

Gibbs samples for a repulsive pair potential, and the Nguyen-Zessin
identity on them:

>>> potential = api.get_potential("repulsive:height=5,range=1,delta=0.25")
>>> window = api.get_window("0..4,0..4")
>>> chain = api.sample_gibbs(window, potential, seed=2)
>>> reports = api.verify_nz(chain.samples, potential, seed=3)

Integrate the atom diffusion from a sample and record observables:

>>> trajectory = api.simulate(chain.samples[-1], potential, seed=4)
>>> trajectory.series.head()

A full verification run is configured by an INI file, see
``config/schema.ini``; :func:`get_config` returns the defaults with
keyword overrides:

>>> config = api.get_config(seed=7, checks=["mecke", "ibp"], n=1000)
>>> status, reports = api.run_suite(config)
>>> api.summarise(reports)

"""
from typing import List, Optional, Sequence, Union

import pandas as pd

from kone.calculus.forms import energy_form_check, ibp_check
from kone.dynamics.checks import reversibility_check, stationarity_check
from kone.dynamics.integrator import run_trajectory
from kone.dynamics.observables import parse_observables
from kone.measure.core import DiscreteMeasure, Window, to_configuration
from kone.measure.cutoffs import CutoffFamily
from kone.measure.metric import metric_d
from kone.parameters import (
    DEFAULT_DIFFUSION_PARAMETERS,
    DEFAULT_MCMC_PARAMETERS,
    DEFAULT_SUITE_PARAMETERS,
    N_CHAINS,
    N_SE,
    S_MIN,
)
from kone.sampling import crm, gibbs
from kone.sampling.intensity import (
    ExponentialDensity,
    WeightDensity,
    gamma_density,
)
from kone.sampling.potentials import (
    PairPotential,
    check_c2,
    parse_potential,
)
from kone.types import (
    DiffusionParams,
    GibbsSamples,
    IbpReport,
    IdentityReport,
    McmcParams,
    ReversibilityReport,
    RunConfig,
    StationarityReport,
    Trajectory,
)
from kone.utils.parallel import map_replicas
from kone.utils.rng import derive_seed, get_rng
from kone.verify.battery import (
    cylinder_pairs,
    default_observables,
    mecke_battery,
    nz_battery,
)
from kone.verify.suite import load_config, run_suite

__all__ = [
    "check_c2",
    "get_config",
    "get_density",
    "get_potential",
    "get_window",
    "load_config",
    "metric_distance",
    "run_suite",
    "sample_crm",
    "sample_gibbs",
    "sample_gibbs_chains",
    "simulate",
    "summarise",
    "verify_energy_dual",
    "verify_ibp",
    "verify_mecke",
    "verify_nz",
    "verify_reversibility",
    "verify_stationarity",
]


def get_config(**kwargs) -> RunConfig:
    """Get the default suite configuration.

    Can be used to override default parameters by passing keyword
    arguments. The seed defaults to 0.
    """
    return {**DEFAULT_SUITE_PARAMETERS, "seed": 0, **kwargs}  # type: ignore


def get_window(window: Union[str, Window]) -> Window:
    """Window from its ``lo..hi,lo..hi[,periodic]`` string form."""
    if isinstance(window, Window):
        return window
    return Window.from_string(window)


def get_density(
    family: str = "gamma",
    alpha: float = 1.0,
    beta: float = 1.0,
) -> WeightDensity:
    """Weight density ``l`` of a built-in family.

    Parameters
    ----------
    family : str
        ``"gamma"`` for ``l(s) = exp(-s)`` or ``"exp"`` for
        ``l(s) = beta exp(-s / alpha)``.
    """
    if family == "gamma":
        return gamma_density()
    if family == "exp":
        return ExponentialDensity(alpha, beta)
    raise ValueError(f"unknown measure family {family!r}")


def get_potential(spec: Union[str, PairPotential]) -> PairPotential:
    """Pair potential from a ``family:key=value,...`` spec."""
    if isinstance(spec, PairPotential):
        return spec
    return parse_potential(spec)


def sample_crm(
    density: WeightDensity,
    window: Union[str, Window],
    s_min: float = S_MIN,
    n: int = 1,
    seed: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> List[DiscreteMeasure]:
    """Draw ``n`` independent truncated samples of the random measure.

    Each sample uses its own stream spawned from ``seed``, so the result
    does not depend on the worker count.
    """
    params = {"s_min": s_min, "window": get_window(window)}
    return map_replicas(
        lambda rng, _: crm.sample_crm(density, params, rng),
        seed if seed is not None else 0,
        n,
        n_jobs,
    )


def sample_gibbs(
    window: Union[str, Window],
    potential: Union[str, PairPotential],
    density: Optional[WeightDensity] = None,
    boundary: Optional[DiscreteMeasure] = None,
    params: Optional[McmcParams] = None,
    seed: Optional[int] = None,
    initial: Optional[DiscreteMeasure] = None,
) -> GibbsSamples:
    """Thinned samples of the finite-volume Gibbs specification.

    Parameters
    ----------
    window : str or Window
        The finite volume.
    potential : str or PairPotential
        Pair potential or its spec.
    density : WeightDensity, optional
        Reference weight density, by default the gamma density.
    boundary : DiscreteMeasure, optional
        Boundary condition outside a non-periodic window.
    params : McmcParams, optional
        Chain parameters, merged into the defaults.
    seed : int, optional
        Seed of the chain.

    Returns
    -------
    GibbsSamples
        Samples and chain diagnostics.
    """
    return gibbs.sample_gibbs(
        get_window(window),
        boundary,
        get_potential(potential),
        density if density is not None else gamma_density(),
        {**DEFAULT_MCMC_PARAMETERS, **(params or {})},
        get_rng(seed=seed),
        initial,
    )


def sample_gibbs_chains(
    window: Union[str, Window],
    potential: Union[str, PairPotential],
    density: Optional[WeightDensity] = None,
    boundary: Optional[DiscreteMeasure] = None,
    params: Optional[McmcParams] = None,
    seed: Optional[int] = None,
    n_chains: int = N_CHAINS,
    n_jobs: Optional[int] = None,
) -> GibbsSamples:
    """Pooled samples of ``n_chains`` chains started empty and dense.

    ``diagnostics["rhat"]`` holds the potential scale reduction factor
    of the energy and count traces; values below 1.1 indicate that the
    chains have forgotten their starts.
    """
    return gibbs.sample_gibbs_chains(
        get_window(window),
        boundary,
        get_potential(potential),
        density if density is not None else gamma_density(),
        {**DEFAULT_MCMC_PARAMETERS, **(params or {})},
        get_rng(seed=seed),
        n_chains,
        n_jobs=n_jobs,
    )


def simulate(
    initial: DiscreteMeasure,
    potential: Optional[Union[str, PairPotential]] = None,
    density: Optional[WeightDensity] = None,
    observables: str = "count,mass,inner",
    params: Optional[DiffusionParams] = None,
    seed: Optional[int] = None,
    boundary: Optional[DiscreteMeasure] = None,
) -> Trajectory:
    """Integrate the atom diffusion from ``initial``.

    ``observables`` is a comma separated list of ``count``, ``mass``,
    ``inner`` and ``energy``.
    """
    if potential is not None:
        potential = get_potential(potential)
    return run_trajectory(
        initial,
        density if density is not None else gamma_density(),
        potential,
        parse_observables(observables, initial.window, potential),
        {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})},
        rng=get_rng(seed=seed),
        boundary=boundary,
    )


def verify_mecke(
    density: Optional[WeightDensity] = None,
    window: Union[str, Window] = "0..1,0..1",
    s_min: float = S_MIN,
    n: int = 10000,
    seed: Optional[int] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> List[IdentityReport]:
    """Mecke identity for the built-in battery of functionals."""
    window = get_window(window)
    density = density if density is not None else gamma_density()
    params = {"s_min": s_min, "window": window}
    rng = get_rng(seed=seed)
    return [
        crm.mecke_check(density, F, params, n, rng, n_inner, n_se)
        for F in mecke_battery(window)
    ]


def verify_nz(
    samples: Sequence[DiscreteMeasure],
    potential: Union[str, PairPotential],
    density: Optional[WeightDensity] = None,
    s_min: float = S_MIN,
    seed: Optional[int] = None,
    boundary: Optional[DiscreteMeasure] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> List[IdentityReport]:
    """Nguyen-Zessin identity on Gibbs samples for the built-in battery."""
    potential = get_potential(potential)
    density = density if density is not None else gamma_density()
    rng = get_rng(seed=seed)
    window = samples[0].window
    return [
        gibbs.nz_check(
            samples,
            density,
            potential,
            F,
            s_min,
            rng,
            boundary,
            n_inner,
            n_se,
        )
        for F in nz_battery(window, potential.range)
    ]


def verify_ibp(
    samples: Sequence[DiscreteMeasure],
    potential: Optional[Union[str, PairPotential]] = None,
    density: Optional[WeightDensity] = None,
    battery: str = "default",
    s_min: Optional[float] = S_MIN,
    boundary: Optional[DiscreteMeasure] = None,
    n_se: float = N_SE,
) -> List[IbpReport]:
    """Integration by parts for each pair of the cylinder battery.

    Pass ``potential=None`` for samples of the reference measure.
    """
    if potential is not None:
        potential = get_potential(potential)
    density = density if density is not None else gamma_density()
    pairs = cylinder_pairs(samples[0].window, battery)
    return [
        ibp_check(F, G, samples, density, potential, boundary, s_min, n_se)
        for F, G in pairs
    ]


def verify_energy_dual(
    samples: Sequence[DiscreteMeasure],
    potential: Optional[Union[str, PairPotential]] = None,
    density: Optional[WeightDensity] = None,
    battery: str = "default",
    s_min: float = S_MIN,
    seed: Optional[int] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> List[IdentityReport]:
    """Direct against inserted-atom estimator of the energy form."""
    if potential is not None:
        potential = get_potential(potential)
    density = density if density is not None else gamma_density()
    rng = get_rng(seed=seed)
    return [
        energy_form_check(
            F,
            G,
            samples,
            density,
            s_min,
            potential,
            rng,
            n_inner=n_inner,
            n_se=n_se,
        )
        for F, G in cylinder_pairs(samples[0].window, battery)
    ]


def verify_stationarity(
    samples: Sequence[DiscreteMeasure],
    potential: Optional[Union[str, PairPotential]] = None,
    density: Optional[WeightDensity] = None,
    params: Optional[DiffusionParams] = None,
    seed: int = 0,
    n_se: float = N_SE,
    n_jobs: Optional[int] = None,
) -> List[StationarityReport]:
    """Invariance of equilibrium samples under the diffusion, for the
    default observables."""
    if potential is not None:
        potential = get_potential(potential)
    density = density if density is not None else gamma_density()
    return stationarity_check(
        samples,
        density,
        potential,
        default_observables(samples[0].window, potential),
        params,
        seed=seed,
        n_se=n_se,
        n_jobs=n_jobs,
    )


def verify_reversibility(
    samples: Sequence[DiscreteMeasure],
    potential: Optional[Union[str, PairPotential]] = None,
    density: Optional[WeightDensity] = None,
    params: Optional[DiffusionParams] = None,
    battery: str = "default",
    n_pairs: int = 3,
    seed: int = 0,
    n_se: float = N_SE,
    n_jobs: Optional[int] = None,
) -> List[ReversibilityReport]:
    """Time symmetry of the diffusion for the first ``n_pairs`` cylinder
    pairs of a battery."""
    if potential is not None:
        potential = get_potential(potential)
    density = density if density is not None else gamma_density()
    pairs = cylinder_pairs(samples[0].window, battery)[:n_pairs]
    return [
        reversibility_check(
            F,
            G,
            samples,
            density,
            potential,
            params,
            seed=derive_seed(seed, index),
            n_se=n_se,
            n_jobs=n_jobs,
        )
        for index, (F, G) in enumerate(pairs)
    ]


def metric_distance(
    eta: DiscreteMeasure,
    eta_prime: DiscreteMeasure,
    cutoffs: Optional[CutoffFamily] = None,
) -> float:
    """The metric ``d = d_V + d_f`` between two measures."""
    return metric_d(
        to_configuration(eta),
        to_configuration(eta_prime),
        cutoffs if cutoffs is not None else CutoffFamily(),
    )


def summarise(reports: Sequence[dict]) -> pd.DataFrame:
    """Tabular view of report lines, one row per case.

    Nested ``details`` and ``config`` entries are dropped.
    """
    rows = [
        {k: v for k, v in r.items() if k not in ("details", "config")}
        for r in reports
    ]
    return pd.DataFrame(rows)
