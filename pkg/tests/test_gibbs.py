"""Test the Gibbs sampler, its energies and the Nguyen-Zessin check."""
import numpy as np
import pytest

from kone.calculus.bumps import ProductBump
from kone.errors import InvalidMeasureError, SupportError
from kone.measure.core import DiscreteMeasure, Window
from kone.parameters import DEFAULT_MCMC_PARAMETERS, RHAT_MAX
from kone.sampling.cells import CellList, cross_pairs, neighbour_pairs
from kone.sampling.crm import sample_crm
from kone.sampling.gibbs import (
    GibbsChainState,
    birth_log_ratio,
    death_log_ratio,
    dispersed_initials,
    filter_boundary,
    gibbs_step,
    hamiltonian_local,
    interaction_fields,
    nz_check,
    rejection_sample_gibbs,
    relative_energy,
    sample_gibbs,
    sample_gibbs_chains,
)
from kone.sampling.intensity import gamma_density
from kone.sampling.potentials import (
    AttractiveRing,
    SmoothstepRepulsion,
    ZeroPotential,
)
from kone.verify.battery import Campbell, battery_bumps, nz_battery
from kone.verify.stats import chi2_poisson_test, mean_se, tv_distance

POTENTIAL = SmoothstepRepulsion(height=5.0, range=1.0, delta=0.25)


def _brute_energy(eta, potential):
    total = 0.0
    for i in range(len(eta)):
        for j in range(i + 1, len(eta)):
            r = eta.window.distance(eta.positions[i], eta.positions[j])
            total += (
                eta.weights[i]
                * eta.weights[j]
                * float(potential.radial(np.array([r]))[0])
            )
    return total


@pytest.mark.parametrize("periodic", [False, True])
def test_neighbour_pairs_match_brute_force(periodic):
    """Test the k-d tree pair search against all pairs."""
    rng = np.random.default_rng(0)
    window = Window.cube(2, 0.0, 5.0, periodic=periodic)
    positions = window.uniform(rng, 60)
    pairs = neighbour_pairs(window, positions, 1.0)
    expected = [
        (i, j)
        for i in range(60)
        for j in range(i + 1, 60)
        if window.distance(positions[i], positions[j]) <= 1.0
    ]
    assert [tuple(p) for p in pairs] == expected


@pytest.mark.parametrize("periodic", [False, True])
def test_cell_list_neighbours(periodic):
    """Test cell list queries against a brute-force scan."""
    rng = np.random.default_rng(1)
    window = Window.cube(2, 0.0, 6.0, periodic=periodic)
    positions = window.uniform(rng, 80)
    cells = CellList(window, 1.0, brute_force_below=0)
    for i, x in enumerate(positions):
        cells.insert(i, x)
    for i in range(0, 80, 7):
        ids, _ = cells.neighbours(positions[i], positions, exclude=i)
        expected = [
            j
            for j in range(80)
            if j != i and window.distance(positions[i], positions[j]) <= 1.0
        ]
        assert list(ids) == expected


def test_cross_pairs():
    """Test pairs between two point sets."""
    a = np.array([[0.0, 0.0], [2.0, 0.0]])
    b = np.array([[0.5, 0.0], [5.0, 5.0]])
    np.testing.assert_array_equal(cross_pairs(a, b, 1.0), [[0, 0]])


@pytest.mark.parametrize("periodic", [False, True])
def test_hamiltonian_matches_brute_force(periodic):
    """Test the pair energy against a double loop."""
    rng = np.random.default_rng(2)
    window = Window.cube(2, 0.0, 4.0, periodic=periodic)
    eta = DiscreteMeasure(
        window.uniform(rng, 40), rng.exponential(1.0, 40) + 0.01, window
    )
    assert hamiltonian_local(eta, None, POTENTIAL) == pytest.approx(
        _brute_energy(eta, POTENTIAL)
    )


def test_relative_energy_is_energy_difference():
    """Test H(eta + s delta_x) - H(eta) = s sum_j s_j phi(x, x_j)."""
    rng = np.random.default_rng(3)
    window = Window.cube(2, 0.0, 3.0)
    eta = DiscreteMeasure(window.uniform(rng, 20), np.ones(20), window)
    x = np.array([1.5, 1.5])
    bigger = eta.add_atom(0.7, x)
    difference = hamiltonian_local(bigger, None, POTENTIAL) - (
        hamiltonian_local(eta, None, POTENTIAL)
    )
    assert relative_energy(0.7, x, eta, POTENTIAL) == pytest.approx(
        difference
    )


def test_interaction_fields_with_boundary():
    """Test per-atom fields including frozen boundary atoms."""
    window = Window.cube(2, 0.0, 2.0)
    eta = DiscreteMeasure([[0.5, 1.0], [0.9, 1.0]], [1.0, 2.0], window)
    boundary = DiscreteMeasure(
        [[-0.2, 1.0]], [3.0], Window((-1.0, 0.0), (0.0, 2.0))
    )
    field, grad = interaction_fields(
        eta.weights, eta.positions, window, POTENTIAL, boundary
    )

    def phi(r):
        return float(POTENTIAL.radial(np.array([r]))[0])

    assert field[0] == pytest.approx(2.0 * phi(0.4) + 3.0 * phi(0.7))
    assert field[1] == pytest.approx(1.0 * phi(0.4))
    assert grad.shape == (2, 2)
    # the boundary atom pushes the first atom to the right
    assert grad[0, 0] < 0
    assert grad[0, 1] == 0.0


def test_filter_boundary():
    """Test dropping far boundary atoms and rejecting inner ones."""
    window = Window.cube(2, 0.0, 2.0)
    outer = Window.cube(2, -3.0, 5.0)
    boundary = DiscreteMeasure(
        [[-0.5, 1.0], [-2.5, 1.0]], [1.0, 1.0], outer
    )
    kept = filter_boundary(window, boundary, 1.0)
    assert len(kept) == 1
    inside = DiscreteMeasure([[1.0, 1.0]], [1.0], outer)
    with pytest.raises(InvalidMeasureError):
        filter_boundary(window, inside, 1.0)


def test_birth_death_ratios_are_reciprocal():
    """Test detailed balance of the birth and death proposals."""
    forward = birth_log_ratio(3.0, 4, 0.8, 0.3, 0.2)
    backward = death_log_ratio(3.0, 5, 0.8, 0.3, 0.2)
    assert forward == pytest.approx(-backward)


def test_cached_energy_tracks_recomputation():
    """Test the incremental energy after many moves."""
    window = Window.cube(2, 0.0, 3.0)
    rng = np.random.default_rng(4)
    eta = DiscreteMeasure.empty(window)
    state = GibbsChainState(eta, POTENTIAL, gamma_density(), 0.01)
    params = {
        "move_probs": (0.25, 0.25, 0.25, 0.25),
        "jump_scale": 0.3,
        "check_every": 0,
    }
    for _ in range(3000):
        gibbs_step(state, params, rng)
    assert state.energy == pytest.approx(
        state.recompute_energy(), rel=1e-8, abs=1e-10
    )
    assert sum(count[0] for count in state.counts.values()) == 3000


def test_periodic_window_must_exceed_twice_the_range():
    """Test the minimum size of periodic windows."""
    window = Window.cube(2, 0.0, 1.5, periodic=True)
    with pytest.raises(InvalidMeasureError):
        GibbsChainState(
            DiscreteMeasure.empty(window), POTENTIAL, gamma_density(), 0.01
        )
    eta = DiscreteMeasure([[0.2, 0.2], [1.3, 1.3]], [1.0, 1.0], window)
    with pytest.raises(InvalidMeasureError):
        hamiltonian_local(eta, None, POTENTIAL)
    assert hamiltonian_local(eta, None, ZeroPotential()) == 0.0


def test_sample_gibbs_diagnostics():
    """Test the shape of the chain output."""
    window = Window.cube(2, 0.0, 3.0)
    result = sample_gibbs(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": 0.01, "burnin": 200, "thin": 5, "n_samples": 50},
        np.random.default_rng(5),
    )
    assert len(result.samples) == 50
    diagnostics = result.diagnostics
    assert len(diagnostics["energy_trace"]) == 50
    assert set(diagnostics["acceptance"]) == {
        "birth",
        "death",
        "weight",
        "move",
    }
    assert 0 < diagnostics["ess"] <= 50


def test_sample_gibbs_rejects_bad_move_probabilities():
    """Test that move probabilities must sum to one."""
    with pytest.raises(ValueError):
        sample_gibbs(
            Window.cube(2, 0.0, 3.0),
            None,
            POTENTIAL,
            gamma_density(),
            {"move_probs": (0.5, 0.5, 0.5, 0.5)},
        )


def test_zero_potential_chain_matches_reference_counts():
    """Test that without interaction the chain samples the reference."""
    window = Window.cube(2, 0.0, 1.0)
    s_min = 0.1
    result = sample_gibbs(
        window,
        None,
        ZeroPotential(range=0.25),
        gamma_density(),
        {"s_min": s_min, "burnin": 500, "thin": 30, "n_samples": 2000},
        np.random.default_rng(6),
    )
    mass = gamma_density().sigma_mass(window, s_min)
    counts = result.diagnostics["count_trace"]
    assert np.mean(counts) == pytest.approx(mass, rel=0.1)
    _, pvalue = chi2_poisson_test(counts, mass)
    assert pvalue > 1e-3


def test_rejection_oracle_needs_nonnegative_potential():
    """Test the guard of the rejection sampler."""
    with pytest.raises(ValueError):
        rejection_sample_gibbs(
            Window.cube(2, 0.0, 1.0),
            AttractiveRing(),
            gamma_density(),
            0.1,
            1,
        )


def test_nz_support_errors():
    """Test that the functional must avoid the truncation and boundary."""
    window = Window.cube(2, 0.0, 6.0)
    eta = DiscreteMeasure.empty(window)
    bumps = battery_bumps(window)
    low = Campbell(bumps["c"])
    with pytest.raises(SupportError):
        nz_check([eta], gamma_density(), POTENTIAL, low, 0.05)

    near_edge = Campbell(ProductBump.box((0.2, 1.0), (0.2, 2.0), (1.0, 3.0)))
    with pytest.raises(SupportError):
        nz_check([eta], gamma_density(), POTENTIAL, near_edge, 0.01)


def test_nz_identity_holds():
    """Test the Nguyen-Zessin identity on Gibbs samples.

    The five functionals share one chain, so each is allowed four
    standard errors: the chance that any of them fails by accident stays
    below 1e-3, against 1.3e-2 at three standard errors.
    """
    window = Window.cube(2, 0.0, 4.0)
    s_min = 0.02
    result = sample_gibbs(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": s_min, "burnin": 5000, "thin": 200, "n_samples": 400},
        np.random.default_rng(7),
    )
    rng = np.random.default_rng(8)
    for F in nz_battery(window, POTENTIAL.range):
        report = nz_check(
            result.samples,
            gamma_density(),
            POTENTIAL,
            F,
            s_min,
            rng,
            n_inner=4,
            n_se=4.0,
        )
        assert report["pass"], F.name


def test_nz_rejects_support_outside_the_window():
    """Test that a functional supported off a periodic window is refused."""
    window = Window.cube(2, 0.0, 4.0, periodic=True)
    eta = DiscreteMeasure.empty(window)
    outside = Campbell(ProductBump.box((0.2, 1.0), (5.0, 5.0), (6.0, 6.0)))
    with pytest.raises(SupportError):
        nz_check([eta], gamma_density(), POTENTIAL, outside, 0.01)


def test_dispersed_initials_alternate_empty_and_dense():
    """Test the default starting configurations of several chains."""
    window = Window.cube(2, 0.0, 2.0)
    s_min = 0.1
    mass = gamma_density().sigma_mass(window, s_min)
    initials = dispersed_initials(
        window, gamma_density(), s_min, 4, np.random.default_rng(9)
    )
    assert [len(eta) for eta in initials[::2]] == [0, 0]
    for eta in initials[1::2]:
        assert len(eta) > 2 * mass
        assert eta.weights.min() >= s_min


def test_sample_gibbs_chains_argument_checks():
    """Test the chain count and the number of initial states."""
    window = Window.cube(2, 0.0, 2.0)
    with pytest.raises(ValueError):
        sample_gibbs_chains(
            window, None, POTENTIAL, gamma_density(), n_chains=1
        )
    with pytest.raises(ValueError):
        sample_gibbs_chains(
            window,
            None,
            POTENTIAL,
            gamma_density(),
            n_chains=2,
            initials=[DiscreteMeasure.empty(window)],
        )


def test_dispersed_chains_converge():
    """Test that chains started empty and dense agree after burn-in."""
    window = Window.cube(2, 0.0, 2.0)
    result = sample_gibbs_chains(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": 0.1, "burnin": 2000, "thin": 20, "n_samples": 250},
        np.random.default_rng(10),
        n_chains=4,
    )
    diagnostics = result.diagnostics
    assert diagnostics["n_chains"] == 4
    assert len(result.samples) == 1000
    assert len(diagnostics["count_trace"]) == 1000
    assert diagnostics["rhat"]["energy"] < RHAT_MAX
    assert diagnostics["rhat"]["count"] < RHAT_MAX


def test_sample_gibbs_chains_is_reproducible():
    """Test that a seed fixes every chain, whatever the worker count."""
    window = Window.cube(2, 0.0, 2.0)
    params = {"s_min": 0.1, "burnin": 50, "thin": 2, "n_samples": 5}
    first = sample_gibbs_chains(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        params,
        np.random.default_rng(11),
        n_jobs=1,
    )
    second = sample_gibbs_chains(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        params,
        np.random.default_rng(11),
        n_jobs=2,
    )
    assert first.samples == second.samples
    assert first.diagnostics["rhat"] == second.diagnostics["rhat"]


def test_chain_matches_rejection_oracle():
    """Test the count law of the chain against exact samples."""
    window = Window.cube(2, 0.0, 1.5)
    s_min = 0.1
    chains = sample_gibbs_chains(
        window,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": s_min, "burnin": 2000, "thin": 40, "n_samples": 1000},
        np.random.default_rng(12),
    )
    exact = rejection_sample_gibbs(
        window,
        POTENTIAL,
        gamma_density(),
        s_min,
        4000,
        np.random.default_rng(13),
    )
    chain_counts = chains.diagnostics["count_trace"]
    exact_counts = [len(eta) for eta in exact]
    assert len(chain_counts) == 4000
    assert tv_distance(chain_counts, exact_counts) < 0.05
    assert np.mean(chain_counts) == pytest.approx(
        np.mean(exact_counts), abs=0.15
    )


def test_repulsion_lowers_energy_and_count():
    """Test that a repulsive potential thins out the reference measure."""
    window = Window.cube(2, 0.0, 3.0)
    s_min = 0.1
    density = gamma_density()
    result = sample_gibbs(
        window,
        None,
        POTENTIAL,
        density,
        {"s_min": s_min, "burnin": 2000, "thin": 20, "n_samples": 500},
        np.random.default_rng(14),
    )
    rng = np.random.default_rng(15)
    reference = [
        sample_crm(density, {"s_min": s_min, "window": window}, rng)
        for _ in range(500)
    ]
    reference_energy = np.mean(
        [hamiltonian_local(eta, None, POTENTIAL) for eta in reference]
    )
    gibbs_energy = np.mean(result.diagnostics["energy_trace"])
    assert gibbs_energy < reference_energy

    mass = density.sigma_mass(window, s_min)
    counts = result.diagnostics["count_trace"]
    _, se = mean_se(counts)
    ess = result.diagnostics["ess"]
    se *= np.sqrt(len(counts) / ess)
    assert np.mean(counts) <= mass + 3 * se


def test_boundary_atoms_beyond_the_range_are_ignored():
    """Test that far boundary atoms change no acceptance decision."""
    window = Window.cube(2, 0.0, 3.0)
    outer = Window.cube(2, -2.0, 6.0)
    near = [[-0.5, 1.5], [3.3, 0.5], [1.0, 3.8]]
    far = [[-1.5, 1.5], [5.0, 5.0], [1.5, 4.2]]
    close = DiscreteMeasure(near, [1.0, 0.5, 2.0], outer)
    with_far = DiscreteMeasure(near + far, [1.0, 0.5, 2.0] + [3.0] * 3, outer)
    eta = sample_crm(
        gamma_density(),
        {"s_min": 0.05, "window": window},
        np.random.default_rng(16),
    )
    states = [
        GibbsChainState(eta, POTENTIAL, gamma_density(), 0.05, boundary)
        for boundary in (close, with_far)
    ]
    for x in ([0.1, 1.5], [2.9, 0.4], [1.2, 2.95]):
        x = np.array(x)
        assert states[0].local_field(x) == states[1].local_field(x)

    params = {**DEFAULT_MCMC_PARAMETERS, "jump_scale": 0.3}
    for state in states:
        rng = np.random.default_rng(17)
        for _ in range(2000):
            gibbs_step(state, params, rng)
    first, second = states
    assert first.energy == second.energy
    assert first.counts == second.counts
    np.testing.assert_array_equal(first.positions, second.positions)
    np.testing.assert_array_equal(first.weights, second.weights)
