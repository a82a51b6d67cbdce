"""Weight densities l(s, x) of the Levy intensity ``l(s, x) / s ds dx``.

Two kinds of densities are provided:

- :class:`ExponentialDensity`, ``l = beta(x) exp(-s / alpha(x))``, with the
  gamma measure ``alpha = beta = 1`` as a special case
  (:func:`gamma_density`);
- :class:`CustomDensity`, any ``l`` dominated by an exponential envelope,
  sampled by thinning the envelope.

Weights are always sampled on the truncated range ``[s_min, inf)``; the
intensity has infinite mass near ``s = 0``.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import exp1

from kone.errors import IntegrationError
from kone.measure.core import Window
from kone.parameters import QUAD_EPSREL, QUAD_LIMIT

logger = logging.getLogger(__name__)

__all__ = [
    "BumpField",
    "ConstantField",
    "CustomDensity",
    "ExponentialDensity",
    "StepFunction",
    "WeightDensity",
    "gamma_density",
    "integrate_window",
    "sample_truncated_weights",
]


@dataclass(frozen=True)
class ConstantField:
    """Spatially constant positive field."""

    constant: float

    def __post_init__(self):
        if not self.constant > 0:
            raise ValueError(f"field must be positive, got {self.constant}")

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(x).shape[0], float(self.constant))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.atleast_2d(x), dtype=float)

    def bounds(self) -> Tuple[float, float]:
        return float(self.constant), float(self.constant)


@dataclass(frozen=True)
class BumpField:
    """``base + amplitude * (1 - |x - centre|^2 / width^2)^4`` inside the
    ball of radius ``width``, ``base`` outside."""

    base: float
    amplitude: float
    centre: Tuple[float, ...]
    width: float

    def __post_init__(self):
        low, _ = self.bounds()
        if not low > 0:
            raise ValueError("bump field must stay positive")
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    def _r2(self, x):
        x = np.atleast_2d(x)
        delta = x - np.asarray(self.centre, dtype=float)
        return delta, np.sum(delta * delta, axis=1) / self.width**2

    def value(self, x: np.ndarray) -> np.ndarray:
        _, r2 = self._r2(x)
        bump = np.clip(1.0 - r2, 0.0, None) ** 4
        return self.base + self.amplitude * bump

    def grad(self, x: np.ndarray) -> np.ndarray:
        delta, r2 = self._r2(x)
        slope = -8.0 * np.clip(1.0 - r2, 0.0, None) ** 3 / self.width**2
        return self.amplitude * slope[:, None] * delta

    def bounds(self) -> Tuple[float, float]:
        ends = (self.base, self.base + self.amplitude)
        return min(ends), max(ends)


def _as_field(value):
    if isinstance(value, (int, float)):
        return ConstantField(float(value))
    return value


def integrate_window(
    func: Callable[..., float],
    window: Window,
    epsrel: float = QUAD_EPSREL,
) -> float:
    """Adaptive quadrature of ``func(x_1, ..., x_d)`` over a box.

    Raises
    ------
    IntegrationError
        If quadrature reports non-convergence.
    """
    ranges = list(zip(window.lo, window.hi))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.nquad(
                func,
                ranges,
                opts={"epsrel": epsrel, "limit": QUAD_LIMIT},
            )
        except integrate.IntegrationWarning as err:
            raise IntegrationError(
                f"quadrature over {window.to_string()} did not converge: "
                f"{err}"
            ) from err
    if not np.isfinite(value):
        raise IntegrationError(
            f"quadrature over {window.to_string()} is not finite"
        )
    logger.debug("nquad value %g (abserr %g)", value, abserr)
    return float(value)


def sample_truncated_weights(
    alpha: np.ndarray,
    s_min: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw weights with density proportional to ``exp(-s / alpha) / s``
    on ``[s_min, inf)``, one per entry of ``alpha``.

    The envelope is ``exp(-s_min / alpha) / s`` (log-uniform proposal) on
    ``[s_min, a]`` and ``exp(-s / alpha) / a`` (shifted exponential
    proposal) on ``(a, inf)`` with ``a = max(alpha, s_min)``.
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    out = np.empty_like(alpha)
    pending = np.arange(alpha.size)
    proposed = 0
    while pending.size:
        a = alpha[pending]
        cut = np.maximum(a, s_min)
        mass_low = np.exp(-s_min / a) * np.log(cut / s_min)
        mass_high = a * np.exp(-cut / a) / cut
        low = rng.uniform(size=a.size) * (mass_low + mass_high) < mass_low
        u = rng.uniform(size=a.size)
        proposal = np.where(
            low,
            s_min * (cut / s_min) ** u,
            cut + rng.exponential(a),
        )
        ratio = np.where(
            low,
            np.exp(-(proposal - s_min) / a),
            cut / proposal,
        )
        accepted = rng.uniform(size=a.size) < ratio
        out[pending[accepted]] = proposal[accepted]
        pending = pending[~accepted]
        proposed += a.size
    if alpha.size:
        logger.debug(
            "weight envelope acceptance rate %.3f", alpha.size / proposed
        )
    return out


class WeightDensity:
    """Base class of weight densities.

    Subclasses provide the density, its log-derivatives, the truncated
    sigma-mass and samplers for the normalised truncated intensity.
    """

    family: str = "custom"

    def __call__(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def d_log_s(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        """``d/ds log l(s, x)``."""
        raise NotImplementedError

    def grad_log_x(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        """``grad_x log l(s, x)``, shape (n, d)."""
        raise NotImplementedError

    def sigma_mass(self, window: Window, s_min: float) -> float:
        """``sigma([s_min, inf) x window)``."""
        raise NotImplementedError

    def ignored_mass(self, window: Window, s_min: float) -> float:
        """Expected mass of the atoms below the truncation,
        ``int_window int_0^s_min l ds dx``."""
        raise NotImplementedError

    def sample_points(
        self,
        window: Window,
        s_min: float,
        n: int,
        rng: np.random.Generator,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """``n`` i.i.d. points from the normalised truncated intensity."""
        raise NotImplementedError

    def sample_weights(
        self,
        x: np.ndarray,
        s_min: float,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """One weight per position from ``l(., x) / s`` on ``[s_min, inf)``."""
        raise NotImplementedError

    def conditional_mass(self, x: np.ndarray, s_min: float) -> np.ndarray:
        """``int_{s_min}^inf l(s, x) / s ds`` at each position."""
        raise NotImplementedError

    def laplace_exponent(
        self,
        x: np.ndarray,
        v: np.ndarray,
        s_min: float = 0.0,
    ) -> np.ndarray:
        """``int_{s_min}^inf (1 - exp(-s v)) l(s, x) / s ds``."""
        raise NotImplementedError

    def moment(self, window: Window, order: int) -> float:
        """``int_window int_0^inf l(s, x) s^order ds dx``."""
        raise NotImplementedError

    @property
    def diverges_at_zero(self) -> bool:
        """Whether ``int_0^inf l(s, x) / s ds`` is infinite for every x."""
        return True

    def integrability_report(self, window: Window) -> dict:
        """Integrability conditions of the intensity on ``window``."""
        moments = {
            f"moment_{order}": self.moment(window, order)
            for order in range(4)
        }
        return {
            "family": self.family,
            "infinite_mass": bool(self.diverges_at_zero),
            **moments,
            "finite_moments": bool(
                all(np.isfinite(v) for v in moments.values())
            ),
        }


class ExponentialDensity(WeightDensity):
    """``l(s, x) = beta(x) exp(-s / alpha(x))``.

    Parameters
    ----------
    alpha, beta : float or spatial field
        Positive scale and intensity fields. Floats are wrapped in
        :class:`ConstantField`.
    """

    def __init__(self, alpha=1.0, beta=1.0):
        self.alpha = _as_field(alpha)
        self.beta = _as_field(beta)

    def __repr__(self):
        return f"ExponentialDensity(alpha={self.alpha}, beta={self.beta})"

    @property
    def is_constant(self) -> bool:
        return isinstance(self.alpha, ConstantField) and isinstance(
            self.beta, ConstantField
        )

    @property
    def family(self) -> str:  # type: ignore[override]
        if (
            self.is_constant
            and self.alpha.constant == 1.0
            and self.beta.constant == 1.0
        ):
            return "gamma"
        return "exp"

    def __call__(self, s, x):
        s = np.asarray(s, dtype=float)
        return self.beta.value(x) * np.exp(-s / self.alpha.value(x))

    def d_log_s(self, s, x):
        s = np.asarray(s, dtype=float)
        return -np.ones_like(s) / self.alpha.value(x)

    def grad_log_x(self, s, x):
        s = np.asarray(s, dtype=float)
        alpha = self.alpha.value(x)
        beta = self.beta.value(x)
        return (
            self.beta.grad(x) / beta[:, None]
            + (s / alpha**2)[:, None] * self.alpha.grad(x)
        )

    def conditional_mass(self, x, s_min):
        return self.beta.value(x) * exp1(s_min / self.alpha.value(x))

    def sigma_mass(self, window, s_min):
        if not s_min > 0:
            raise ValueError(f"s_min must be positive, got {s_min}")
        if self.is_constant:
            return float(
                self.beta.constant
                * window.volume
                * exp1(s_min / self.alpha.constant)
            )
        return integrate_window(
            lambda *x: float(self.conditional_mass(np.array([x]), s_min)[0]),
            window,
        )

    def ignored_mass(self, window, s_min):
        def density(x):
            alpha = self.alpha.value(x)
            return self.beta.value(x) * alpha * -np.expm1(-s_min / alpha)

        if self.is_constant:
            return float(
                density(np.zeros((1, window.dim)))[0] * window.volume
            )
        return integrate_window(
            lambda *x: float(density(np.array([x]))[0]), window
        )

    def sample_weights(self, x, s_min, rng):
        return sample_truncated_weights(self.alpha.value(x), s_min, rng)

    def sample_positions(self, window, s_min, n, rng):
        """Positions with density proportional to ``conditional_mass``."""
        if self.is_constant:
            return window.uniform(rng, n)
        beta_hi = self.beta.bounds()[1]
        alpha_hi = self.alpha.bounds()[1]
        bound = beta_hi * exp1(s_min / alpha_hi)
        out: List[np.ndarray] = []
        remaining = n
        while remaining > 0:
            proposal = window.uniform(rng, max(remaining, 16))
            ratio = self.conditional_mass(proposal, s_min) / bound
            accepted = proposal[rng.uniform(size=len(proposal)) < ratio]
            out.append(accepted[:remaining])
            remaining -= len(out[-1])
        return np.concatenate(out) if out else np.zeros((0, window.dim))

    def sample_points(self, window, s_min, n, rng):
        positions = self.sample_positions(window, s_min, n, rng)
        weights = self.sample_weights(positions, s_min, rng)
        return weights, positions

    def laplace_exponent(self, x, v, s_min=0.0):
        alpha = self.alpha.value(x)
        beta = self.beta.value(x)
        v = np.asarray(v, dtype=float)
        if s_min == 0.0:
            return beta * np.log1p(alpha * v)
        return beta * (exp1(s_min / alpha) - exp1(s_min * (1.0 / alpha + v)))

    def moment(self, window, order):
        factor = math.factorial(order)

        def density(x):
            alpha = self.alpha.value(x)
            return factor * self.beta.value(x) * alpha ** (order + 1)

        if self.is_constant:
            return float(
                density(np.zeros((1, window.dim)))[0] * window.volume
            )
        return integrate_window(
            lambda *x: float(density(np.array([x]))[0]), window
        )


def gamma_density() -> ExponentialDensity:
    """Gamma measure, ``l(s, x) = exp(-s)``."""
    return ExponentialDensity(1.0, 1.0)


class CustomDensity(WeightDensity):
    """User supplied ``l`` dominated by a constant exponential envelope.

    Parameters
    ----------
    func : callable
        Vectorised ``l(s, x)``.
    envelope : ExponentialDensity
        Constant-field density with ``func <= envelope`` everywhere.
    d_log_s, grad_log_x : callable, optional
        Log-derivatives of ``func``. Needed by the generator and the
        diffusion; omitted derivatives raise ``ValueError`` when used.
    diverges_at_zero : bool
        Whether ``int l / s ds`` is infinite; declared by the caller.
    """

    family = "custom"

    def __init__(
        self,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        envelope: ExponentialDensity,
        d_log_s: Optional[Callable] = None,
        grad_log_x: Optional[Callable] = None,
        diverges_at_zero: bool = True,
    ):
        if not envelope.is_constant:
            raise ValueError("the envelope must have constant fields")
        self.func = func
        self.envelope = envelope
        self._d_log_s = d_log_s
        self._grad_log_x = grad_log_x
        self._diverges = diverges_at_zero

    @property
    def diverges_at_zero(self) -> bool:
        return self._diverges

    def __call__(self, s, x):
        return self.func(np.asarray(s, dtype=float), np.atleast_2d(x))

    def d_log_s(self, s, x):
        if self._d_log_s is None:
            raise ValueError("custom density has no s log-derivative")
        return self._d_log_s(np.asarray(s, dtype=float), np.atleast_2d(x))

    def grad_log_x(self, s, x):
        if self._grad_log_x is None:
            raise ValueError("custom density has no x log-gradient")
        return self._grad_log_x(
            np.asarray(s, dtype=float), np.atleast_2d(x)
        )

    def _thin(self, s, x, rng):
        ratio = self(s, x) / self.envelope(s, x)
        if np.any(ratio > 1.0 + 1e-12):
            raise ValueError("custom density exceeds its envelope")
        return rng.uniform(size=len(s)) < ratio

    def sample_weights(self, x, s_min, rng):
        x = np.atleast_2d(x)
        out = np.empty(len(x))
        pending = np.arange(len(x))
        while pending.size:
            s = self.envelope.sample_weights(x[pending], s_min, rng)
            keep = self._thin(s, x[pending], rng)
            out[pending[keep]] = s[keep]
            pending = pending[~keep]
        return out

    def sample_points(self, window, s_min, n, rng):
        weights: List[np.ndarray] = []
        positions: List[np.ndarray] = []
        remaining = n
        while remaining > 0:
            s, x = self.envelope.sample_points(
                window, s_min, max(remaining, 16), rng
            )
            keep = self._thin(s, x, rng)
            weights.append(s[keep][:remaining])
            positions.append(x[keep][:remaining])
            remaining -= len(weights[-1])
        if not weights:
            return np.zeros(0), np.zeros((0, window.dim))
        return np.concatenate(weights), np.concatenate(positions)

    def conditional_mass(self, x, s_min):
        x = np.atleast_2d(x)
        values = []
        for row in x:
            value, _ = integrate.quad(
                lambda s: float(self(np.array([s]), row[None])[0]) / s,
                s_min,
                np.inf,
                epsrel=QUAD_EPSREL,
                limit=QUAD_LIMIT,
            )
            values.append(value)
        return np.array(values)

    def sigma_mass(self, window, s_min):
        if not s_min > 0:
            raise ValueError(f"s_min must be positive, got {s_min}")
        return integrate_window(
            lambda *x: float(self.conditional_mass(np.array([x]), s_min)[0]),
            window,
        )

    def ignored_mass(self, window, s_min):
        def inner(*x):
            value, _ = integrate.quad(
                lambda s: float(self(np.array([s]), np.array([x]))[0]),
                0.0,
                s_min,
                epsrel=QUAD_EPSREL,
            )
            return value

        return integrate_window(inner, window)

    def laplace_exponent(self, x, v, s_min=0.0):
        x = np.atleast_2d(x)
        v = np.broadcast_to(np.asarray(v, dtype=float), (len(x),))
        values = []
        for row, v_row in zip(x, v):
            value, _ = integrate.quad(
                lambda s: -np.expm1(-s * v_row)
                * float(self(np.array([s]), row[None])[0])
                / s,
                s_min,
                np.inf,
                epsrel=QUAD_EPSREL,
                limit=QUAD_LIMIT,
            )
            values.append(value)
        return np.array(values)

    def moment(self, window, order):
        def inner(*x):
            value, _ = integrate.quad(
                lambda s: float(self(np.array([s]), np.array([x]))[0])
                * s**order,
                0.0,
                np.inf,
                epsrel=QUAD_EPSREL,
                limit=QUAD_LIMIT,
            )
            return value

        return integrate_window(inner, window)


@dataclass(frozen=True)
class StepFunction:
    """Nonnegative step function ``sum_j v_j 1_{B_j}`` on disjoint boxes."""

    boxes: Tuple[Window, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.boxes) != len(self.values):
            raise ValueError("need one value per box")
        if any(v < 0 for v in self.values):
            raise ValueError("step function values must be nonnegative")
        for i, a in enumerate(self.boxes):
            for b in self.boxes[i + 1 :]:
                if a.intersect(b) is not None:
                    raise ValueError("step function boxes must be disjoint")

    @classmethod
    def constant(cls, value: float, window: Window) -> "StepFunction":
        return cls((window,), (float(value),))

    @classmethod
    def pieces(
        cls,
        items: Sequence[Tuple[Window, float]],
    ) -> "StepFunction":
        return cls(
            tuple(box for box, _ in items),
            tuple(float(v) for _, v in items),
        )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.zeros(len(x))
        for box, value in zip(self.boxes, self.values):
            out = np.where(box.contains(x), value, out)
        return out
