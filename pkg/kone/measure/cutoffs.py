"""Smooth cutoff functions in space and in weight.

``phi_k`` is a smooth version of the indicator of the box B(k) and
``psi_n`` localises weights to the dyadic band ``[q^n, q^{n-1}]``. Both are
built from polynomial smoothstep ramps.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np

from kone.measure.core import DiscreteMeasure, Window
from kone.parameters import CUTOFF_Q, K_MAX, SMOOTHSTEP_ORDER

logger = logging.getLogger(__name__)

__all__ = [
    "CutoffFamily",
    "check_constraints",
    "estimate_box_moments",
    "load_moments",
    "save_moments",
    "smoothstep",
    "smoothstep_derivative",
]


def smoothstep(t: np.ndarray, order: int = SMOOTHSTEP_ORDER) -> np.ndarray:
    """Polynomial ramp from 0 (t <= 0) to 1 (t >= 1).

    Order 1 is ``3t^2 - 2t^3`` and order 2 is ``6t^5 - 15t^4 + 10t^3``.
    """
    t = np.clip(t, 0.0, 1.0)
    if order == 1:
        return t * t * (3.0 - 2.0 * t)
    if order == 2:
        return t**3 * (t * (6.0 * t - 15.0) + 10.0)
    raise ValueError(f"smoothstep order must be 1 or 2, got {order}")


def smoothstep_derivative(
    t: np.ndarray,
    order: int = SMOOTHSTEP_ORDER,
) -> np.ndarray:
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    if order == 1:
        value = 6.0 * t * (1.0 - t)
    elif order == 2:
        value = 30.0 * t * t * (t - 1.0) ** 2
    else:
        raise ValueError(f"smoothstep order must be 1 or 2, got {order}")
    return np.where(inside, value, 0.0)


@dataclass(frozen=True)
class CutoffFamily:
    """Cutoffs ``phi_k``, ``psi_n`` and the weights ``c_k`` of the metric.

    Parameters
    ----------
    q : float
        Ratio of the dyadic weight bands, in (0, 1).
    order : int
        Smoothstep order (1 or 2).
    c : tuple of float
        Positive weights ``c_1, ..., c_K``; ``K = len(c)``.
    """

    q: float = CUTOFF_Q
    order: int = SMOOTHSTEP_ORDER
    c: tuple = field(
        default_factory=lambda: tuple(2.0**-k for k in range(1, K_MAX + 1))
    )

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        c = tuple(float(v) for v in self.c)
        if not c or any(not v > 0 for v in c):
            raise ValueError("c_k must be a non-empty positive sequence")
        object.__setattr__(self, "c", c)

    @classmethod
    def from_moments(
        cls,
        moments: Dict[int, float],
        q: float = CUTOFF_Q,
        order: int = SMOOTHSTEP_ORDER,
    ) -> "CutoffFamily":
        """Weights ``c_k = 2^-k / (1 + m_k)`` from first moments of B(k+1)."""
        ks = sorted(int(k) for k in moments)
        if ks != list(range(1, len(ks) + 1)):
            raise ValueError(f"moments must cover k = 1..K, got {ks}")
        c = tuple(2.0**-k / (1.0 + float(moments[k])) for k in ks)
        return cls(q=q, order=order, c=c)

    @property
    def k_max(self) -> int:
        return len(self.c)

    @property
    def c_sum(self) -> float:
        return float(np.sum(self.c))

    # weight cutoffs

    def psi(self, n: int, s: np.ndarray) -> np.ndarray:
        q = self.q
        s = np.asarray(s, dtype=float)
        rise = smoothstep(
            (s - q ** (n + 1)) / (q**n - q ** (n + 1)), self.order
        )
        fall = smoothstep(
            (q ** (n - 2) - s) / (q ** (n - 2) - q ** (n - 1)), self.order
        )
        return np.where(s <= q**n, rise, fall)

    def dpsi(self, n: int, s: np.ndarray) -> np.ndarray:
        q = self.q
        s = np.asarray(s, dtype=float)
        width_up = q**n - q ** (n + 1)
        width_down = q ** (n - 2) - q ** (n - 1)
        rise = smoothstep_derivative((s - q ** (n + 1)) / width_up, self.order)
        fall = smoothstep_derivative(
            (q ** (n - 2) - s) / width_down, self.order
        )
        return np.where(s <= q**n, rise / width_up, -fall / width_down)

    def n_range(self, s: np.ndarray) -> np.ndarray:
        """All n with ``psi_n(s) > 0`` for some of the given weights."""
        s = np.asarray(s, dtype=float)
        if s.size == 0:
            return np.zeros(0, dtype=int)
        levels = np.log(s) / np.log(self.q)
        lo = int(np.floor(levels.min())) - 1
        hi = int(np.ceil(levels.max())) + 2
        return np.arange(lo, hi + 1)

    def psi_matrix(self, ns: Iterable[int], s: np.ndarray) -> np.ndarray:
        return np.stack([self.psi(int(n), s) for n in ns])

    def dpsi_matrix(self, ns: Iterable[int], s: np.ndarray) -> np.ndarray:
        return np.stack([self.dpsi(int(n), s) for n in ns])

    # spatial cutoffs

    def _ramp(self, k: int, t: np.ndarray) -> np.ndarray:
        return smoothstep(k + 1.0 - t, self.order)

    def _dramp(self, k: int, t: np.ndarray) -> np.ndarray:
        return -smoothstep_derivative(k + 1.0 - t, self.order)

    def phi(self, k: int, x: np.ndarray) -> np.ndarray:
        """Tensorised cutoff, 1 on B(k) and 0 outside B(k+1)."""
        x = np.atleast_2d(x)
        return np.prod(self._ramp(k, np.abs(x)), axis=-1)

    def grad_phi(self, k: int, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        ramps = self._ramp(k, np.abs(x))
        slopes = self._dramp(k, np.abs(x)) * np.sign(x)
        grad = np.empty_like(x)
        for axis in range(x.shape[1]):
            others = np.delete(ramps, axis, axis=1)
            grad[:, axis] = slopes[:, axis] * np.prod(others, axis=1)
        return grad

    def kappa(self, k: int, n: int, s: np.ndarray, x: np.ndarray):
        """``kappa_kn(s, x) = phi_k(x) psi_n(s) s``."""
        s = np.asarray(s, dtype=float)
        return self.phi(k, x) * self.psi(n, s) * s

    def box(self, k: int, dim: int) -> Window:
        return Window.ball_box(k, dim)


def check_constraints(
    cutoffs: CutoffFamily,
    dim: int = 2,
    ks: Sequence[int] = (1, 2, 3),
    ns: Sequence[int] = tuple(range(-3, 4)),
    n_grid: int = 1000,
    tol: float = 1e-12,
) -> dict:
    """Evaluate the cutoff constraints on dense grids.

    Checked are ``1_B(k) <= phi_k <= 1_B(k+1)`` with
    ``|d phi_k / d x_i| <= 2 * 1_B(k+1)``, the band bounds on ``psi_n``
    with ``|psi_n'| <= 2 / (q^n - q^(n+1))``, and
    ``1 <= sum_n psi_n(s) <= 4`` on a log-spaced grid of ``n_grid``
    weights spanning twelve decades.

    Returns
    -------
    dict
        One boolean per constraint family, the observed range of
        ``sum_n psi_n`` and an overall ``pass``.
    """
    per_axis = max(11, int(round(n_grid ** (1.0 / dim))))
    phi_ok = True
    for k in ks:
        axis = np.linspace(-(k + 2.0), k + 2.0, per_axis)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        x = np.column_stack([m.ravel() for m in mesh])
        inner = Window.ball_box(k, dim).contains(x).astype(float)
        outer = Window.ball_box(k + 1, dim).contains(x).astype(float)
        value = cutoffs.phi(k, x)
        slope = np.abs(cutoffs.grad_phi(k, x))
        phi_ok &= bool(
            np.all(inner <= value + tol)
            and np.all(value <= outer + tol)
            and np.all(slope <= 2.0 * outer[:, None] + tol)
        )

    q = cutoffs.q
    psi_ok = True
    for n in ns:
        s = np.geomspace(q ** (n + 2), q ** (n - 3), n_grid)
        core = ((s >= q**n) & (s <= q ** (n - 1))).astype(float)
        band = ((s >= q ** (n + 1)) & (s <= q ** (n - 2))).astype(float)
        value = cutoffs.psi(n, s)
        slope = np.abs(cutoffs.dpsi(n, s))
        psi_ok &= bool(
            np.all(core <= value + tol)
            and np.all(value <= band + tol)
            and np.all(slope <= 2.0 / (q**n - q ** (n + 1)) + tol)
        )

    s = np.geomspace(1e-6, 1e6, n_grid)
    total = np.zeros_like(s)
    for n in cutoffs.n_range(s):
        total += cutoffs.psi(int(n), s)
    sum_ok = bool(np.all(total >= 1.0 - tol) and np.all(total <= 4.0 + tol))
    c_ok = bool(np.isfinite(cutoffs.c_sum))
    return {
        "phi": phi_ok,
        "psi": psi_ok,
        "psi_sum": sum_ok,
        "psi_sum_min": float(total.min()),
        "psi_sum_max": float(total.max()),
        "c_summable": c_ok,
        "pass": phi_ok and psi_ok and sum_ok and c_ok,
    }


def estimate_box_moments(
    sample: Callable[[np.random.Generator], DiscreteMeasure],
    ks: Sequence[int],
    n: int,
    seed: int,
) -> Dict[int, float]:
    """Monte Carlo first moments ``E[eta(B(k+1))]``.

    Parameters
    ----------
    sample : callable
        Draws one measure from a generator.
    ks : sequence of int
        Indices k.
    n : int
        Number of draws.
    seed : int
        Seed of the stream.
    """
    rng = np.random.default_rng(seed)
    totals = {int(k): 0.0 for k in ks}
    for _ in range(n):
        eta = sample(rng)
        for k in totals:
            box = Window.ball_box(k + 1, eta.dim)
            mask = box.contains(eta.positions)
            totals[k] += float(np.sum(eta.weights[mask]))
    moments = {k: total / n for k, total in totals.items()}
    logger.debug("estimated box moments %s", moments)
    return moments


def save_moments(path: str, moments: Dict[int, float]):
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(path, "w") as f:
        json.dump({str(k): v for k, v in moments.items()}, f, indent=2)


def load_moments(path: str) -> Optional[Dict[int, float]]:
    """Read a moment sidecar; ``None`` when it does not exist."""
    if not os.path.exists(path):
        return None
    with open(path) as f:
        data = json.load(f)
    return {int(k): float(v) for k, v in data.items()}
