"""Estimators and statistical tests shared by the verifiers."""
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from kone.errors import EmptySampleError
from kone.parameters import N_SE
from kone.types import IdentityReport

__all__ = [
    "chi2_density_test",
    "chi2_poisson_test",
    "effective_sample_size",
    "fit_log_slope",
    "gelman_rubin",
    "identity_report",
    "ks_two_sample",
    "mean_se",
    "tv_distance",
]


def mean_se(values: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and its standard error.

    Raises
    ------
    EmptySampleError
        If ``values`` is empty.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptySampleError("cannot estimate from zero samples")
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, float("inf")
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))


def identity_report(
    lhs_values: Sequence[float],
    rhs_values: Sequence[float],
    n_se: float = N_SE,
    paired: bool = True,
) -> IdentityReport:
    """Compare two Monte Carlo estimates of the same quantity.

    With ``paired`` the samples come from the same draws and the combined
    standard error is that of the per-draw difference; otherwise the two
    errors are combined in quadrature.
    """
    lhs, se_lhs = mean_se(lhs_values)
    rhs, se_rhs = mean_se(rhs_values)
    if paired:
        _, se = mean_se(
            np.asarray(lhs_values, dtype=float)
            - np.asarray(rhs_values, dtype=float)
        )
    else:
        se = float(np.hypot(se_lhs, se_rhs))
    return {
        "lhs": lhs,
        "rhs": rhs,
        "se_lhs": se_lhs,
        "se_rhs": se_rhs,
        "se": se,
        "pass": bool(abs(lhs - rhs) <= n_se * se),
    }


def chi2_poisson_test(
    counts: Sequence[int],
    mean: float,
    min_expected: float = 5.0,
) -> Tuple[float, float]:
    """Chi-squared goodness of fit of counts against Poisson(``mean``).

    Bins with small expected frequency are merged into the tails.

    Returns
    -------
    statistic : float
    pvalue : float
    """
    counts = np.asarray(counts, dtype=int)
    if counts.size == 0:
        raise EmptySampleError("no counts to test")
    n = counts.size
    top = int(max(counts.max(), stats.poisson.ppf(1 - 1e-9, mean))) + 1
    support = np.arange(top + 1)
    probs = stats.poisson.pmf(support, mean)
    probs[-1] += stats.poisson.sf(top, mean)
    observed = np.bincount(counts, minlength=top + 1)[: top + 1]

    # merge bins left to right until each has enough expected mass
    edges = [0]
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p * n
        if acc >= min_expected:
            edges.append(i + 1)
            acc = 0.0
    if edges[-1] != len(probs):
        if len(edges) > 1:
            edges[-1] = len(probs)
        else:
            edges.append(len(probs))
    obs = np.add.reduceat(observed, edges[:-1])
    exp = np.add.reduceat(probs * n, edges[:-1])
    if obs.size < 2:
        return 0.0, 1.0
    exp = exp * obs.sum() / exp.sum()
    result = stats.chisquare(obs, exp)
    return float(result.statistic), float(result.pvalue)


def chi2_density_test(
    samples: Sequence[float],
    density: Callable[[float], float],
    lo: float,
    hi: float,
    n_bins: int = 20,
    log_bins: bool = False,
) -> Tuple[float, float]:
    """Chi-squared test of samples on ``[lo, hi]`` against an unnormalised
    density."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySampleError("no samples to test")
    if log_bins:
        edges = np.geomspace(lo, hi, n_bins + 1)
    else:
        edges = np.linspace(lo, hi, n_bins + 1)
    masses = np.array(
        [
            integrate.quad(density, a, b, epsrel=1e-10)[0]
            for a, b in zip(edges[:-1], edges[1:])
        ]
    )
    expected = masses / masses.sum() * samples.size
    observed, _ = np.histogram(np.clip(samples, lo, hi), bins=edges)
    result = stats.chisquare(observed, expected)
    return float(result.statistic), float(result.pvalue)


def ks_two_sample(a: Sequence[float], b: Sequence[float]):
    """Two-sample Kolmogorov-Smirnov statistic and p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("KS test needs two non-empty samples")
    result = stats.ks_2samp(a, b)
    return float(result.statistic), float(result.pvalue)


def tv_distance(a: Sequence[int], b: Sequence[int]) -> float:
    """Total variation distance between the empirical laws of two integer
    samples."""
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("TV distance needs two non-empty samples")
    size = int(max(a.max(), b.max())) + 1
    pa = np.bincount(a, minlength=size) / a.size
    pb = np.bincount(b, minlength=size) / b.size
    return float(0.5 * np.abs(pa - pb).sum())


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    n = x.size
    centred = x - x.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    spectrum = np.fft.rfft(centred, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    if acov[0] == 0:
        return np.zeros(n)
    return acov / acov[0]


def effective_sample_size(trace: Sequence[float]) -> float:
    """Effective sample size with Geyer's initial positive sequence."""
    x = np.asarray(trace, dtype=float)
    n = x.size
    if n < 4:
        return float(n)
    rho = _autocorrelation(x)
    if not np.any(rho):
        return float(n)
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
    tau = max(tau, 1.0 / n)
    return float(min(n / tau, n))


def gelman_rubin(chains: Sequence[Sequence[float]]) -> float:
    """Potential scale reduction factor of several equal-length traces."""
    chains = np.asarray(chains, dtype=float)
    if chains.ndim != 2 or chains.shape[0] < 2 or chains.shape[1] < 2:
        raise EmptySampleError("R-hat needs at least two chains of length 2")
    m, n = chains.shape
    means = chains.mean(axis=1)
    within = chains.var(axis=1, ddof=1).mean()
    between = n * means.var(ddof=1)
    if within == 0:
        return 1.0
    pooled = (n - 1) / n * within + between / n
    return float(np.sqrt(pooled / within))


def fit_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)
