"""Test the kone Python API."""
import numpy as np
import pandas as pd
import pytest

from kone import api
from kone.measure.core import DiscreteMeasure, Window
from kone.parameters import DEFAULT_SUITE_PARAMETERS
from kone.sampling.intensity import ExponentialDensity
from kone.sampling.potentials import SmoothstepRepulsion


def test_get_default_config():
    """Test getting the default configuration."""
    config = api.get_config()
    assert config["seed"] == 0
    for key, value in DEFAULT_SUITE_PARAMETERS.items():
        assert config[key] == value


def test_get_config_with_overrides():
    """Test overriding default parameters."""
    config = api.get_config(seed=3, checks=["c2"], n=50)
    assert config["seed"] == 3
    assert config["checks"] == ["c2"]
    assert config["n"] == 50


def test_get_density_and_potential():
    """Test the named builders."""
    assert api.get_density("gamma").family == "gamma"
    density = api.get_density("exp", alpha=2.0, beta=3.0)
    assert isinstance(density, ExponentialDensity)
    with pytest.raises(ValueError):
        api.get_density("beta")
    potential = api.get_potential("repulsive:height=2,range=1,delta=0.25")
    assert isinstance(potential, SmoothstepRepulsion)
    assert api.get_potential(potential) is potential
    assert api.get_window("0..2,0..3") == Window((0, 0), (2, 3))


def test_sample_crm_does_not_depend_on_workers():
    """Test that samples are identical for any worker count."""
    density = api.get_density("gamma")
    serial = api.sample_crm(density, "0..1,0..1", 0.01, 6, seed=4, n_jobs=1)
    parallel = api.sample_crm(
        density, "0..1,0..1", 0.01, 6, seed=4, n_jobs=2
    )
    assert serial == parallel
    assert serial[0] != serial[1]


def test_sample_gibbs_with_defaults():
    """Test the Gibbs sampler wrapper."""
    chain = api.sample_gibbs(
        "0..3,0..3",
        "repulsive:height=5,range=1,delta=0.25",
        params={"burnin": 100, "thin": 2, "n_samples": 10, "s_min": 0.01},
        seed=1,
    )
    assert len(chain.samples) == 10
    assert all(isinstance(eta, DiscreteMeasure) for eta in chain.samples)


def test_sample_gibbs_chains_reports_rhat():
    """Test the multi-chain wrapper."""
    chains = api.sample_gibbs_chains(
        "0..2,0..2",
        "repulsive:height=5,range=1,delta=0.25",
        params={"burnin": 100, "thin": 2, "n_samples": 5, "s_min": 0.1},
        seed=2,
        n_chains=3,
    )
    assert len(chains.samples) == 15
    assert set(chains.diagnostics["rhat"]) == {"energy", "count"}
    assert chains.diagnostics["n_chains"] == 3


def test_simulate_from_sample():
    """Test the diffusion wrapper."""
    eta = DiscreteMeasure(
        [[1.0, 1.0], [2.0, 2.5]], [0.5, 1.0], Window.cube(2, 0.0, 4.0)
    )
    trajectory = api.simulate(
        eta,
        "repulsive:height=5,range=1,delta=0.25",
        observables="count,energy",
        params={"T": 0.004, "dt": 0.001, "record_every": 2},
        seed=2,
    )
    assert list(trajectory.series.columns) == ["t", "count", "energy"]
    assert len(trajectory.series) == 3


def test_verify_mecke_returns_one_report_per_functional():
    """Test the Mecke wrapper."""
    reports = api.verify_mecke(window="0..4,0..4", n=100, seed=5)
    assert len(reports) == 3
    assert {"lhs", "rhs", "se", "pass"} <= set(reports[0])


def test_metric_distance():
    """Test the metric between a single atom and the empty measure."""
    window = Window.cube(2, -1.0, 1.0)
    eta = DiscreteMeasure([[0.0, 0.0]], [1.0], window)
    empty = DiscreteMeasure.empty(window)
    assert api.metric_distance(eta, eta) == 0.0
    distance = api.metric_distance(eta, empty)
    assert distance == pytest.approx(api.metric_distance(empty, eta))
    assert distance > 0


def test_summarise():
    """Test the tabular view of report lines."""
    reports = [
        {
            "check": "c2",
            "lhs": 5.0,
            "rhs": 0.0,
            "pass": True,
            "details": {"epsilon": 1.0},
            "config": {"seed": 1},
        },
        {"check": "metric", "lhs": 2.0, "rhs": 2.0, "pass": True},
    ]
    table = api.summarise(reports)
    assert isinstance(table, pd.DataFrame)
    assert list(table.columns) == ["check", "lhs", "rhs", "pass"]
    assert table["pass"].all()
    np.testing.assert_allclose(table["lhs"], [5.0, 2.0])


def test_run_suite_from_config():
    """Test a stability run through the API."""
    status, reports = api.run_suite(api.get_config(checks=["c2"]))
    assert status == 0
    assert reports[0]["check"] == "c2"
