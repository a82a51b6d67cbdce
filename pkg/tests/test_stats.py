"""Test the statistical helpers and the replica machinery."""
import numpy as np
import pytest

from kone.errors import EmptySampleError
from kone.utils.parallel import map_replicas, split_counts
from kone.utils.rng import derive_seed, spawn_generators
from kone.verify.stats import (
    chi2_poisson_test,
    effective_sample_size,
    fit_log_slope,
    gelman_rubin,
    identity_report,
    ks_two_sample,
    mean_se,
    tv_distance,
)


def test_mean_se():
    """Test the sample mean and its standard error."""
    mean, se = mean_se([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert mean_se([5.0]) == (5.0, float("inf"))
    with pytest.raises(EmptySampleError):
        mean_se([])


def test_identity_report_paired_and_unpaired():
    """Test the combined standard error of both modes."""
    lhs = np.array([1.0, 2.0, 3.0, 4.0])
    rhs = lhs + 0.5
    paired = identity_report(lhs, rhs, n_se=3.0)
    assert paired["se"] == 0.0
    assert not paired["pass"]
    unpaired = identity_report(lhs, rhs, n_se=3.0, paired=False)
    assert unpaired["se"] == pytest.approx(np.sqrt(2.0) * mean_se(lhs)[1])
    assert unpaired["pass"]


def test_poisson_test_accepts_poisson_counts():
    """Test the chi-squared test on genuine Poisson draws."""
    rng = np.random.default_rng(0)
    counts = rng.poisson(7.0, 3000)
    _, pvalue = chi2_poisson_test(counts, 7.0)
    assert pvalue > 1e-3
    _, pvalue = chi2_poisson_test(counts, 9.0)
    assert pvalue < 1e-6


def test_ks_and_total_variation():
    """Test two-sample comparisons."""
    rng = np.random.default_rng(1)
    a = rng.normal(size=500)
    assert ks_two_sample(a, a) == (0.0, 1.0)
    assert tv_distance([0, 1, 1, 2], [0, 1, 1, 2]) == 0.0
    assert tv_distance([0, 0], [1, 1]) == 1.0
    with pytest.raises(EmptySampleError):
        tv_distance([], [1])


def test_effective_sample_size():
    """Test the ESS of independent and of correlated traces."""
    rng = np.random.default_rng(2)
    white = rng.normal(size=4000)
    assert effective_sample_size(white) > 2000
    walk = np.cumsum(white)
    assert effective_sample_size(walk) < 100
    assert effective_sample_size(np.ones(10)) == 10.0


def test_gelman_rubin():
    """Test R-hat for agreeing and for disagreeing chains."""
    rng = np.random.default_rng(3)
    same = rng.normal(size=(4, 1000))
    assert gelman_rubin(same) == pytest.approx(1.0, abs=0.02)
    shifted = same + 2.0 * np.arange(4)[:, None]
    assert gelman_rubin(shifted) > 1.5
    with pytest.raises(EmptySampleError):
        gelman_rubin([[1.0, 2.0]])


def test_fit_log_slope():
    """Test the log-log slope of a power law."""
    x = np.array([4e-3, 2e-3, 1e-3])
    assert fit_log_slope(x, 3.0 * x) == pytest.approx(1.0)
    assert fit_log_slope(x, -(x**2)) == pytest.approx(2.0)


def test_split_counts():
    """Test near-equal splits."""
    assert split_counts(10, 3) == [4, 3, 3]
    assert split_counts(2, 4) == [1, 1, 0, 0]


def test_replicas_do_not_depend_on_workers():
    """Test that replica results are identical for any worker count."""

    def draw(rng, index):
        return index, float(rng.normal())

    serial = map_replicas(draw, 11, 8, n_jobs=1)
    threaded = map_replicas(draw, 11, 8, n_jobs=3)
    assert serial == threaded
    assert [index for index, _ in serial] == list(range(8))


def test_seed_derivation():
    """Test that derived seeds are deterministic and distinct."""
    assert derive_seed(1, "coarse") == derive_seed(1, "coarse")
    assert derive_seed(1, "coarse") != derive_seed(2, "coarse")
    assert derive_seed(1, "coarse") != derive_seed(1, "fine")
    first, second = spawn_generators(5, 2)
    assert first.normal() != second.normal()
