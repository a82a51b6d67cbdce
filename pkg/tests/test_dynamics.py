"""Test the Euler-Maruyama integrator and the dynamic checks."""
import numpy as np
import pytest
from scipy import special, stats

from kone.calculus.cylinder import CylinderFunction, LinearOuter, TanhOuter
from kone.dynamics.checks import (
    SLOPE_RANGE,
    generator_consistency,
    reversibility_check,
    stationarity_check,
)
from kone.dynamics.integrator import (
    SimulationState,
    drift,
    drifts,
    em_step,
    reflect_into,
    run_trajectory,
)
from kone.dynamics.observables import (
    AtomCount,
    BoxMass,
    Energy,
    parse_observables,
)
from kone.errors import InvalidMeasureError
from kone.measure.core import DiscreteMeasure, Window
from kone.sampling.crm import sample_crm
from kone.sampling.gibbs import sample_gibbs
from kone.sampling.intensity import gamma_density
from kone.sampling.potentials import SmoothstepRepulsion
from kone.verify.battery import battery_bumps, cylinder_pairs

POTENTIAL = SmoothstepRepulsion(height=2.0, range=1.0, delta=0.25)


def _random_measure(seed=0, n=30, side=5.0, periodic=False):
    rng = np.random.default_rng(seed)
    window = Window.cube(2, 0.0, side, periodic=periodic)
    return DiscreteMeasure(
        window.uniform(rng, n), rng.uniform(0.1, 2.0, n), window
    )


def test_reflect_into():
    """Test mirroring at both barriers."""
    values, outside = reflect_into(
        np.array([-0.1, 0.5, 1.2, 2.5]), 0.0, 1.0
    )
    np.testing.assert_allclose(values, [0.1, 0.5, 0.8, 0.5])
    assert outside.tolist() == [True, False, True, True]


def test_one_dimensional_runs_need_opt_in():
    """Test the dimension guard of the integrator."""
    window = Window.cube(1, 0.0, 1.0)
    eta = DiscreteMeasure([[0.5]], [1.0], window)
    with pytest.raises(ValueError):
        SimulationState(eta, gamma_density())
    with pytest.warns(UserWarning):
        SimulationState(eta, gamma_density(), allow_1d=True)


def test_initial_weights_must_lie_between_barriers():
    """Test that atoms outside [s_min, s_max] are rejected."""
    window = Window.cube(2, 0.0, 1.0)
    eta = DiscreteMeasure([[0.5, 0.5]], [1e-4], window)
    with pytest.raises(InvalidMeasureError):
        SimulationState(eta, gamma_density())


@pytest.mark.parametrize("periodic", [False, True])
def test_cell_list_drift_matches_vectorised_drift(periodic):
    """Test the per-atom drift against the all-atom drift."""
    eta = _random_measure(periodic=periodic)
    state = SimulationState(eta, gamma_density(), POTENTIAL)
    b_x, b_s = drifts(state)
    for i in range(len(eta)):
        d_x, d_s = drift(state, i)
        np.testing.assert_allclose(d_x, b_x[i], atol=1e-12)
        assert d_s == pytest.approx(b_s[i], abs=1e-12)


def test_drift_only_step_of_free_gamma_atoms():
    """Test ds = -s dt for independent atoms under the gamma density."""
    eta = _random_measure(n=5)
    state = SimulationState(
        eta, gamma_density(), params={"dt": 0.01}, noise=False
    )
    em_step(state)
    np.testing.assert_allclose(state.weights, eta.weights * 0.99)
    np.testing.assert_allclose(state.positions, eta.positions)
    assert state.t == pytest.approx(0.01)


def test_run_trajectory_records_observables():
    """Test the recorded time series."""
    eta = _random_measure()
    box = Window((1.0, 1.0), (4.0, 4.0))
    trajectory = run_trajectory(
        eta,
        gamma_density(),
        POTENTIAL,
        [AtomCount(), BoxMass(box, "inner"), Energy(POTENTIAL)],
        {"dt": 1e-3, "T": 0.01, "record_every": 5},
        np.random.default_rng(1),
    )
    series = trajectory.series
    assert list(series.columns) == ["t", "count", "inner", "energy"]
    np.testing.assert_allclose(series["t"], [0.0, 0.005, 0.01])
    assert np.all(series["count"] == len(eta))
    assert len(trajectory.final) == len(eta)
    assert np.all(eta.window.contains(trajectory.final.positions))
    assert 0.0 <= trajectory.reflection_rate <= 1.0


def test_trajectory_is_reproducible():
    """Test that a seed fixes the trajectory."""
    eta = _random_measure()
    params = {"dt": 1e-3, "T": 0.005}
    first = run_trajectory(
        eta, gamma_density(), POTENTIAL, [], params, np.random.default_rng(2)
    )
    second = run_trajectory(
        eta, gamma_density(), POTENTIAL, [], params, np.random.default_rng(2)
    )
    assert first.final == second.final


def test_parse_observables():
    """Test the observable names understood on the command line."""
    window = Window.cube(2, 0.0, 4.0)
    observables = parse_observables("count, inner,mass", window)
    assert [o.name for o in observables] == ["count", "inner", "mass"]
    assert observables[1].box == Window((1.0, 1.0), (3.0, 3.0))
    with pytest.raises(ValueError):
        parse_observables("colour", window)
    with pytest.raises(ValueError):
        parse_observables("energy", window)
    assert parse_observables("energy", window, POTENTIAL)[0].name == "energy"


def test_reversibility_at_time_zero_is_exact():
    """Test that F = G and T = 0 give a zero difference."""
    window = Window.cube(2, 0.0, 4.0)
    rng = np.random.default_rng(3)
    samples = [
        sample_crm(gamma_density(), {"s_min": 0.05, "window": window}, rng)
        for _ in range(20)
    ]
    F, _ = cylinder_pairs(window, "default")[0]
    report = reversibility_check(
        F,
        F,
        samples,
        gamma_density(),
        None,
        {"T": 0.0, "s_min": 0.05},
        seed=4,
    )
    assert report["difference"] == 0.0
    assert report["bias_budget"] == 0.0
    assert report["pass"]


def test_free_atoms_are_stationary():
    """Test that the truncated gamma measure is preserved without
    interaction."""
    window = Window.cube(2, 0.0, 2.0)
    s_min = 0.05
    rng = np.random.default_rng(5)
    samples = [
        sample_crm(gamma_density(), {"s_min": s_min, "window": window}, rng)
        for _ in range(200)
    ]
    observables = [
        AtomCount(),
        BoxMass(Window((0.5, 0.5), (1.5, 1.5)), "inner"),
    ]
    reports = stationarity_check(
        samples,
        gamma_density(),
        None,
        observables,
        {"dt": 1e-3, "T": 0.05, "s_min": s_min},
        seed=6,
        n_se=4.0,
        n_jobs=1,
    )
    assert [r["observable"] for r in reports] == ["count", "inner"]
    assert reports[0]["ks_pvalue"] == pytest.approx(1.0)
    for report in reports:
        assert report["pass"], report


def test_generator_consistency_by_quadrature():
    """Test that one-step increments converge to the generator at
    first order."""
    window = Window.cube(2, 0.0, 40.0)
    f = battery_bumps(window)["a"]
    F = CylinderFunction(LinearOuter([1.0]), [f])
    eta = DiscreteMeasure(
        [[19.0, 21.0], [21.5, 19.5], [20.2, 20.8]], [1.0, 0.6, 1.2], window
    )
    report = generator_consistency(
        F, eta, gamma_density(), method="quadrature"
    )
    assert report["pass"], report
    assert len(report["errors"]) == 3
    assert report["errors"][0] > report["errors"][-1]


def test_generator_consistency_by_monte_carlo():
    """Test first order convergence of the Monte Carlo increments under
    interaction."""
    window = Window.cube(2, 0.0, 4.0)
    F, _ = cylinder_pairs(window, "default")[1]
    eta = DiscreteMeasure([[2.0, 2.1], [1.9, 2.3]], [0.8, 1.2], window)
    report = generator_consistency(
        F, eta, gamma_density(), POTENTIAL, n_replicas=2000, seed=7
    )
    assert set(report) == {
        "generator",
        "dts",
        "estimates",
        "errors",
        "ses",
        "slope",
        "pass",
    }
    assert all(se >= 0 for se in report["ses"])
    assert report["pass"], report
    assert SLOPE_RANGE[0] <= report["slope"] <= SLOPE_RANGE[1]
    assert report["errors"][0] > report["errors"][-1]


def test_generator_consistency_rejects_bad_methods():
    """Test the method guards."""
    window = Window.cube(2, 0.0, 4.0)
    f = battery_bumps(window)["a"]
    eta = DiscreteMeasure([[2.0, 2.0]], [1.0], window)
    nonlinear = CylinderFunction(TanhOuter([1.0]), [f])
    with pytest.raises(ValueError):
        generator_consistency(
            nonlinear, eta, gamma_density(), method="quadrature"
        )
    with pytest.raises(ValueError):
        generator_consistency(nonlinear, eta, gamma_density(), method="exact")


def test_free_weights_keep_the_gamma_law():
    """Test that free weights stay distributed as exp(-s) / s above the
    truncation."""
    window = Window.cube(2, 0.0, 10.0, periodic=True)
    s_min = 0.1
    rng = np.random.default_rng(8)
    positions = window.uniform(rng, 4000)
    weights = gamma_density().sample_weights(positions, s_min, rng)
    state = SimulationState(
        DiscreteMeasure(positions, weights, window),
        gamma_density(),
        params={"dt": 2e-4, "s_min": s_min},
        rng=rng,
    )
    for _ in range(2500):
        em_step(state)
    assert state.t == pytest.approx(0.5)
    _, pvalue = stats.kstest(
        state.weights,
        lambda s: 1.0 - special.exp1(s) / special.exp1(s_min),
    )
    assert pvalue > 1e-3


def test_repulsive_pair_drifts_apart():
    """Test that the drift separates two atoms up to the range."""
    window = Window.cube(2, 0.0, 4.0)
    eta = DiscreteMeasure([[2.0, 1.575], [2.0, 2.425]], [1.0, 1.0], window)
    state = SimulationState(
        eta, gamma_density(), POTENTIAL, {"dt": 0.01}, noise=False
    )
    distances = [0.85]
    for _ in range(20):
        em_step(state)
        distances.append(
            float(np.linalg.norm(state.positions[1] - state.positions[0]))
        )
    assert np.all(np.diff(distances) >= 0)
    assert distances[1] > 0.9
    assert 0.98 < distances[-1] <= POTENTIAL.range
    np.testing.assert_allclose(state.positions[:, 0], 2.0)
    np.testing.assert_allclose(state.positions.mean(axis=0), [2.0, 2.0])


def test_pair_beyond_the_range_feels_no_drift():
    """Test that atoms farther apart than the range do not move."""
    window = Window.cube(2, 0.0, 4.0)
    eta = DiscreteMeasure([[2.0, 1.4], [2.0, 2.6]], [1.0, 1.0], window)
    state = SimulationState(
        eta, gamma_density(), POTENTIAL, {"dt": 0.01}, noise=False
    )
    for _ in range(5):
        em_step(state)
    np.testing.assert_array_equal(state.positions, eta.positions)


@pytest.fixture(scope="module")
def interacting_samples():
    window = Window.cube(2, 0.0, 3.0, periodic=True)
    result = sample_gibbs(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": 0.05, "burnin": 3000, "thin": 100, "n_samples": 200},
        np.random.default_rng(9),
    )
    return result.samples


def test_gibbs_measure_is_stationary(interacting_samples):
    """Test that the diffusion preserves the Gibbs measure."""
    observables = [
        AtomCount(),
        BoxMass(Window((0.75, 0.75), (2.25, 2.25)), "inner"),
        Energy(POTENTIAL),
    ]
    reports = stationarity_check(
        interacting_samples,
        gamma_density(),
        POTENTIAL,
        observables,
        {"dt": 1e-3, "T": 0.05, "s_min": 0.05},
        seed=10,
        n_se=4.0,
        n_jobs=1,
    )
    assert [r["observable"] for r in reports] == ["count", "inner", "energy"]
    for report in reports:
        assert report["pass"], report


def test_gibbs_measure_is_reversible(interacting_samples):
    """Test E[F(eta_0) G(eta_T)] = E[G(eta_0) F(eta_T)] under
    interaction."""
    window = interacting_samples[0].window
    F, G = cylinder_pairs(window, "default")[0]
    report = reversibility_check(
        F,
        G,
        interacting_samples,
        gamma_density(),
        POTENTIAL,
        {"dt": 1e-3, "T": 0.05, "s_min": 0.05},
        seed=11,
        n_jobs=1,
    )
    assert report["pass"], report
