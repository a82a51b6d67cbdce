"""Completely random measures: sampling, Laplace functional, Mecke check."""
import logging
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from kone.errors import EmptySampleError, SupportError
from kone.measure.core import DiscreteMeasure, Window, pair
from kone.parameters import N_SE, QUAD_EPSREL, QUAD_LIMIT
from kone.sampling.intensity import (
    StepFunction,
    WeightDensity,
    integrate_window,
)
from kone.types import (
    CrmSampleParams,
    EstimateReport,
    Functional,
    IdentityReport,
    Support,
)
from kone.utils.rng import get_rng
from kone.verify.stats import identity_report, mean_se

logger = logging.getLogger(__name__)

__all__ = [
    "laplace_functional",
    "laplace_mc",
    "mecke_check",
    "sample_crm",
    "sigma_integral",
]


def sample_crm(
    density: WeightDensity,
    params: CrmSampleParams,
    rng: Optional[np.random.Generator] = None,
) -> DiscreteMeasure:
    """Sample the truncated completely random measure on a window.

    The atoms form a Poisson process on ``[s_min, inf) x window`` with
    intensity ``l(s, x) / s ds dx``: the count is Poisson with mean the
    truncated sigma-mass and, given the count, atoms are i.i.d. from the
    normalised intensity.

    Parameters
    ----------
    density : WeightDensity
        Weight density ``l``.
    params : CrmSampleParams
        Truncation level, window and optional seed.
    rng : np.random.Generator, optional
        Random stream. Created from ``params["seed"]`` when not given.

    Returns
    -------
    DiscreteMeasure
        The sample. Its ``meta`` holds ``s_min``, ``sigma_mass`` and
        ``expected_ignored_mass``.

    Raises
    ------
    IntegrationError
        If the sigma-mass quadrature fails.
    """
    s_min = float(params["s_min"])
    if not s_min > 0:
        raise ValueError(f"s_min must be positive, got {s_min}")
    window = params["window"]
    rng = get_rng(rng, params.get("seed"))
    mass = density.sigma_mass(window, s_min)
    count = int(rng.poisson(mass))
    weights, positions = density.sample_points(window, s_min, count, rng)
    meta = {
        "s_min": s_min,
        "sigma_mass": mass,
        "expected_ignored_mass": density.ignored_mass(window, s_min),
    }
    logger.debug("sampled %d atoms (sigma mass %g)", count, mass)
    return DiscreteMeasure(positions, weights, window, meta)


def laplace_functional(
    density: WeightDensity,
    f: StepFunction,
    window: Window,
    s_min: float = 0.0,
) -> float:
    """``E[exp(-<f, eta>)]`` for a nonnegative step function ``f``.

    With ``s_min = 0`` this is the functional of the untruncated measure,
    ``exp(-int log(1 + alpha f) beta dx)`` for exponential families. With
    ``s_min > 0`` it is the exact functional of the truncated process.
    """
    exponent = 0.0
    for box, value in zip(f.boxes, f.values):
        piece = box.intersect(window)
        if piece is None or value == 0.0:
            continue
        if getattr(density, "is_constant", False):
            centre = np.zeros((1, window.dim))
            exponent += (
                float(density.laplace_exponent(centre, value, s_min)[0])
                * piece.volume
            )
            continue
        exponent += _integrate_box(
            lambda x, v=value: float(
                density.laplace_exponent(x, v, s_min)[0]
            ),
            piece,
        )
    return float(np.exp(-exponent))


def _integrate_box(func: Callable[[np.ndarray], float], box: Window):
    return integrate_window(lambda *x: func(np.array([x])), box)


def laplace_mc(
    density: WeightDensity,
    f: StepFunction,
    params: CrmSampleParams,
    n: int,
    rng: Optional[np.random.Generator] = None,
) -> EstimateReport:
    """Monte Carlo mean of ``exp(-<f, eta>)`` over truncated samples."""
    rng = get_rng(rng, params.get("seed"))
    values = [
        np.exp(-pair(f, sample_crm(density, params, rng))) for _ in range(n)
    ]
    estimate, se = mean_se(values)
    return {"estimate": estimate, "se": se}


def sigma_integral(
    density: WeightDensity,
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    support: Support,
) -> float:
    """Quadrature value of ``int f dsigma`` over a support box.

    ``f`` is vectorised in ``(s, x)``. This is the Campbell value of
    ``E[sum_x f(s_x, x)]``.
    """

    def integrand(s, *x):
        point = np.array([x])
        s_arr = np.array([s])
        return float(f(s_arr, point)[0] * density(s_arr, point)[0] / s)

    ranges = [(support.s_lo, support.s_hi)] + list(
        zip(support.lo, support.hi)
    )
    value, _ = integrate.nquad(
        integrand,
        ranges,
        opts={"epsrel": QUAD_EPSREL, "limit": QUAD_LIMIT},
    )
    return float(value)


def mecke_check(
    density: WeightDensity,
    F: Functional,
    params: CrmSampleParams,
    n: int,
    rng: Optional[np.random.Generator] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> IdentityReport:
    """Two-sided Monte Carlo check of the Mecke identity.

    ``E[sum_x F(s_x, x, eta)] = E[int F(s, x, eta + s delta_x) dsigma]``

    The left side averages the atom sum over ``n`` samples. The right
    side integrates against the truncated sigma by importance sampling
    ``n_inner`` points per sample from the normalised truncated
    intensity restricted to the support of ``F``; both sides use the same
    samples.

    Raises
    ------
    EmptySampleError
        If ``n`` is zero.
    SupportError
        If the spatial support of ``F`` misses the window.
    """
    if n <= 0:
        raise EmptySampleError("mecke_check needs at least one sample")
    rng = get_rng(rng, params.get("seed"))
    window = params["window"]
    s_min = float(params["s_min"])
    support = F.support
    box = Window(support.lo, support.hi).intersect(window)
    if box is None:
        raise SupportError(
            f"functional {F.name} is supported outside the window"
        )
    s_floor = max(s_min, support.s_lo)
    mass = density.sigma_mass(box, s_floor)
    if support.s_lo < s_min:
        logger.warning(
            "functional %s is supported below the truncation %g",
            F.name,
            s_min,
        )
    lhs = np.empty(n)
    rhs = np.empty(n)
    for i in range(n):
        eta = sample_crm(density, params, rng)
        lhs[i] = (
            float(np.sum(F(eta.weights, eta.positions, eta)))
            if len(eta)
            else 0.0
        )
        s, x = density.sample_points(box, s_floor, n_inner, rng)
        inserted = [
            float(F(s[j : j + 1], x[j : j + 1], eta.add_atom(s[j], x[j]))[0])
            for j in range(n_inner)
        ]
        rhs[i] = mass * float(np.mean(inserted))
    return identity_report(lhs, rhs, n_se=n_se)
