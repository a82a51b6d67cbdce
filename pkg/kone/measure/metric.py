"""Metrics on finite marked configurations.

The full metric is ``d = d_V + d_f``. The part ``d_f`` is built from the
cutoffs ``kappa_kn(s, x) = phi_k(x) psi_n(s) s``::

    d_k(g, g') = sum_n |<kappa_kn, g - g'>|
    d_f(g, g') = sum_k c_k d_k / (1 + d_k)

The vague part ``d_V`` is a fixed countable family of tent functions in
``(log s, x)``; see :func:`hat_centres`.
"""
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from kone.measure.core import MarkedConfiguration, Window
from kone.measure.cutoffs import CutoffFamily
from kone.parameters import N_HATS

__all__ = [
    "hat_centres",
    "metric_d",
    "metric_df",
    "metric_dk",
    "metric_dv",
    "metric_square_field_bound",
    "smoothed_metric_df",
    "smoothed_metric_df_gradient",
]


def _kappa_sums(
    gamma: MarkedConfiguration,
    k: int,
    ns: np.ndarray,
    cutoffs: CutoffFamily,
) -> np.ndarray:
    """``<kappa_kn, gamma>`` for each n in ``ns``."""
    if len(gamma) == 0 or ns.size == 0:
        return np.zeros(ns.size)
    s = gamma.weights
    spatial = cutoffs.phi(k, gamma.positions) * s
    return cutoffs.psi_matrix(ns, s) @ spatial


def _joint_n_range(gamma, gamma_prime, cutoffs) -> np.ndarray:
    weights = np.concatenate([gamma.weights, gamma_prime.weights])
    return cutoffs.n_range(weights)


def metric_dk(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    k: int,
    cutoffs: CutoffFamily,
) -> float:
    """``d_k = sum_n |<kappa_kn, gamma - gamma'>|``.

    The sum over n is restricted to the bands meeting a weight present in
    either configuration, which is exact as each ``psi_n`` vanishes
    elsewhere.
    """
    ns = _joint_n_range(gamma, gamma_prime, cutoffs)
    diff = _kappa_sums(gamma, k, ns, cutoffs) - _kappa_sums(
        gamma_prime, k, ns, cutoffs
    )
    return float(np.sum(np.abs(diff)))


def metric_df(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    cutoffs: CutoffFamily,
) -> float:
    total = 0.0
    for k, c_k in enumerate(cutoffs.c, start=1):
        d_k = metric_dk(gamma, gamma_prime, k, cutoffs)
        total += c_k * d_k / (1.0 + d_k)
    return total


@lru_cache(maxsize=16)
def hat_centres(dim: int, n_hats: int = N_HATS) -> Tuple[np.ndarray, ...]:
    """Centres and half-widths of the tent functions used by ``d_V``.

    The tents live on ``(log s, x) in R^{1+d}``. Stage ``m = 0, 1, ...``
    contributes tents of half-width ``2^-m`` centred on the grid of
    spacing ``2^-m`` inside the cube ``[-(m+1), m+1]^{1+d}``; within a
    stage tents are ordered by the distance of their centre to the
    origin, then lexicographically. The first ``n_hats`` tents are kept.

    Returns
    -------
    centres : np.ndarray
        Shape (n_hats, 1 + d).
    widths : np.ndarray
        Shape (n_hats,).
    """
    centres: List[np.ndarray] = []
    widths: List[float] = []
    stage = 0
    while len(centres) < n_hats:
        h = 2.0**-stage
        steps = int(round((stage + 1) / h))
        axis = np.arange(-steps, steps + 1) * h
        grid = np.stack(
            np.meshgrid(*([axis] * (dim + 1)), indexing="ij"), axis=-1
        ).reshape(-1, dim + 1)
        order = np.lexsort(
            tuple(grid[:, i] for i in reversed(range(dim + 1)))
            + (np.linalg.norm(grid, axis=1),)
        )
        for point in grid[order]:
            centres.append(point)
            widths.append(h)
            if len(centres) == n_hats:
                break
        stage += 1
    return np.array(centres), np.array(widths)


def _hat_pairings(
    gamma: MarkedConfiguration,
    centres: np.ndarray,
    widths: np.ndarray,
) -> np.ndarray:
    if len(gamma) == 0:
        return np.zeros(len(centres))
    coords = np.column_stack([np.log(gamma.weights), gamma.positions])
    offsets = np.abs(coords[None, :, :] - centres[:, None, :])
    tents = np.clip(1.0 - offsets / widths[:, None, None], 0.0, None)
    return np.prod(tents, axis=-1).sum(axis=1)


def metric_dv(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    n_hats: int = N_HATS,
) -> float:
    """``d_V = sum_j 2^-j min(1, |<g_j, gamma - gamma'>|)``, at most 1."""
    dim = gamma.dim if len(gamma) else gamma_prime.dim
    centres, widths = hat_centres(dim, n_hats)
    diff = _hat_pairings(gamma, centres, widths) - _hat_pairings(
        gamma_prime, centres, widths
    )
    scales = 2.0 ** -np.arange(1, len(centres) + 1)
    return float(np.sum(scales * np.minimum(1.0, np.abs(diff))))


def metric_d(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    cutoffs: CutoffFamily,
    n_hats: int = N_HATS,
) -> float:
    """``d = d_V + d_f``; bounded by ``1 + sum_k c_k``."""
    return metric_dv(gamma, gamma_prime, n_hats) + metric_df(
        gamma, gamma_prime, cutoffs
    )


def _u(t: np.ndarray, N: int) -> np.ndarray:
    """Absolute value mollified on ``(-1/N, 1/N)``."""
    a = np.abs(t)
    return np.where(a < 1.0 / N, 0.5 * N * t * t, a - 0.5 / N)


def _du(t: np.ndarray, N: int) -> np.ndarray:
    return np.clip(N * t, -1.0, 1.0)


def _smoothed_parts(gamma, gamma_prime, cutoffs, N):
    ns = np.arange(-N, N + 1)
    parts = []
    for k in range(1, min(N, cutoffs.k_max) + 1):
        a = _kappa_sums(gamma, k, ns, cutoffs) - _kappa_sums(
            gamma_prime, k, ns, cutoffs
        )
        parts.append((k, a, float(np.sum(_u(a, N)))))
    return ns, parts


def smoothed_metric_df(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    cutoffs: CutoffFamily,
    N: int,
) -> float:
    """Smooth approximation ``d_f^(N)`` of ``d_f``.

    Uses ``k <= N``, ``|n| <= N`` and the mollified absolute value ``u_N``.
    """
    _, parts = _smoothed_parts(gamma, gamma_prime, cutoffs, N)
    return float(
        sum(cutoffs.c[k - 1] * d / (1.0 + d) for k, _, d in parts)
    )


def smoothed_metric_df_gradient(
    gamma: MarkedConfiguration,
    gamma_prime: MarkedConfiguration,
    cutoffs: CutoffFamily,
    N: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of ``d_f^(N)(., gamma')`` at each point of ``gamma``.

    Returns
    -------
    grad_x : np.ndarray
        Shape (n, d); derivative in the position of each point.
    grad_s : np.ndarray
        Shape (n,); derivative in the mark of each point.
    """
    ns, parts = _smoothed_parts(gamma, gamma_prime, cutoffs, N)
    s = gamma.weights
    x = gamma.positions
    grad_x = np.zeros_like(x)
    grad_s = np.zeros_like(s)
    if len(gamma) == 0:
        return grad_x, grad_s
    psi = cutoffs.psi_matrix(ns, s)
    dpsi = cutoffs.dpsi_matrix(ns, s)
    for k, a, d in parts:
        outer = cutoffs.c[k - 1] / (1.0 + d) ** 2
        weights = _du(a, N)
        band = weights @ psi
        dband = weights @ dpsi
        grad_x += outer * (band * s)[:, None] * cutoffs.grad_phi(k, x)
        grad_s += outer * cutoffs.phi(k, x) * (dband * s + band)
    return grad_x, grad_s


def metric_square_field_bound(
    gamma: MarkedConfiguration,
    cutoffs: CutoffFamily,
) -> float:
    """Dominating function of the square field of ``d_f^(N)``.

    ``G_2(gamma) = (C_1 + C_2) sum_i s_i sum_k c_k 1_{B(k+1)}(x_i)`` with
    ``C_1 = 256 d sum c`` and ``C_2 = 4 (8 / (q^2 (1 - q)) + 4)^2 sum c``.
    """
    if len(gamma) == 0:
        return 0.0
    q = cutoffs.q
    c_sum = cutoffs.c_sum
    c1 = 256.0 * gamma.dim * c_sum
    c2 = 4.0 * (8.0 / (q * q * (1.0 - q)) + 4.0) ** 2 * c_sum
    local = np.zeros(len(gamma))
    for k, c_k in enumerate(cutoffs.c, start=1):
        box = Window.ball_box(k + 1, gamma.dim)
        local += c_k * box.contains(gamma.positions)
    return float((c1 + c2) * np.dot(gamma.weights, local))
