"""Test the Dirichlet form estimators and integration by parts."""
import numpy as np
import pytest

from kone.calculus.bumps import ProductBump
from kone.calculus.cylinder import CylinderFunction, LinearOuter
from kone.calculus.forms import (
    energy_form_check,
    energy_form_mc,
    energy_form_nz,
    ibp_check,
    joint_support,
)
from kone.calculus.generator import square_field
from kone.errors import EmptySampleError, SupportError
from kone.measure.core import DiscreteMeasure, Window
from kone.sampling.crm import sample_crm
from kone.sampling.gibbs import sample_gibbs
from kone.sampling.intensity import gamma_density
from kone.sampling.potentials import SmoothstepRepulsion
from kone.verify.battery import cylinder_pairs

WINDOW = Window.cube(2, 0.0, 4.0)
S_MIN = 0.02
POTENTIAL = SmoothstepRepulsion(height=5.0, range=1.0, delta=0.25)

# fixture name and potential of each equilibrium measure
MEASURES = {"crm": ("samples", None), "gibbs": ("gibbs_samples", POTENTIAL)}


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(0)
    params = {"s_min": S_MIN, "window": WINDOW}
    return [sample_crm(gamma_density(), params, rng) for _ in range(400)]


@pytest.fixture(scope="module")
def gibbs_samples():
    result = sample_gibbs(
        WINDOW,
        None,
        POTENTIAL,
        gamma_density(),
        {"s_min": S_MIN, "burnin": 5000, "thin": 200, "n_samples": 400},
        np.random.default_rng(2),
    )
    return result.samples


def test_energy_form_is_symmetric(samples):
    """Test E(F, G) = E(G, F) exactly on the same samples."""
    for F, G in cylinder_pairs(WINDOW, "default"):
        forward = energy_form_mc(F, G, samples[:50])
        backward = energy_form_mc(G, F, samples[:50])
        assert forward["estimate"] == backward["estimate"]


def test_energy_form_on_the_diagonal_is_square_field(samples):
    """Test E(F, F) = E[Gamma(F)]."""
    F, _ = cylinder_pairs(WINDOW, "default")[0]
    expected = np.mean([square_field(F, eta) for eta in samples[:50]])
    estimate = energy_form_mc(F, F, samples[:50])["estimate"]
    assert estimate == pytest.approx(expected, rel=1e-12)


def test_energy_form_needs_samples():
    """Test that an empty sample list is rejected."""
    F, G = cylinder_pairs(WINDOW, "default")[0]
    with pytest.raises(EmptySampleError):
        energy_form_mc(F, G, [])
    with pytest.raises(EmptySampleError):
        ibp_check(F, G, [], gamma_density())


def test_joint_support():
    """Test the bounding box of several inner functions."""
    a = ProductBump.box((0.1, 1.0), (1.0, 1.0), (2.0, 2.0))
    b = ProductBump.box((0.5, 3.0), (1.5, 0.5), (2.5, 1.5))
    F = CylinderFunction(LinearOuter([1.0]), [a])
    G = CylinderFunction(LinearOuter([1.0]), [b])
    support = joint_support(F, G)
    assert support.s_lo == pytest.approx(0.1)
    assert support.s_hi == pytest.approx(3.0)
    np.testing.assert_allclose(support.lo, (1.0, 0.5))
    np.testing.assert_allclose(support.hi, (2.5, 2.0))


@pytest.mark.parametrize("measure", list(MEASURES))
def test_integration_by_parts(measure, request):
    """Test E(F, G) = -E[L F * G] for the reference and a Gibbs measure."""
    name, potential = MEASURES[measure]
    samples = request.getfixturevalue(name)
    for F, G in cylinder_pairs(WINDOW, "default"):
        report = ibp_check(
            F,
            G,
            samples,
            gamma_density(),
            potential,
            s_min=S_MIN,
            n_se=4.0,
        )
        assert report["pass"], (F.name, G.name, report)
        assert report["residual"] == pytest.approx(
            report["E_form"] + report["pairing"], abs=1e-9
        )


def test_integration_by_parts_support_errors(samples):
    """Test that supports must avoid the truncation and the boundary."""
    low = ProductBump.box((0.01, 1.0), (1.5, 1.5), (2.5, 2.5))
    edge = ProductBump.box((0.1, 1.0), (0.0, 1.5), (1.0, 2.5))
    for f in (low, edge):
        F = CylinderFunction(LinearOuter([1.0]), [f])
        with pytest.raises(SupportError):
            ibp_check(F, F, samples[:5], gamma_density(), s_min=S_MIN)


def test_integration_by_parts_on_periodic_windows_allows_edges():
    """Test that periodic windows have no boundary to avoid."""
    window = Window.cube(2, 0.0, 4.0, periodic=True)
    edge = ProductBump.box((0.1, 1.0), (0.0, 1.5), (1.0, 2.5))
    F = CylinderFunction(LinearOuter([1.0]), [edge])
    eta = DiscreteMeasure([[0.5, 2.0]], [0.5], window)
    report = ibp_check(F, F, [eta, eta], gamma_density(), s_min=S_MIN)
    assert set(report) == {"E_form", "pairing", "residual", "se", "pass"}


@pytest.mark.parametrize("measure", list(MEASURES))
def test_inserted_atom_form_agrees_with_direct_form(measure, request):
    """Test the direct and inserted-atom estimators of the form."""
    name, potential = MEASURES[measure]
    samples = request.getfixturevalue(name)
    rng = np.random.default_rng(1)
    for F, G in cylinder_pairs(WINDOW, "linear")[:3]:
        report = energy_form_check(
            F,
            G,
            samples,
            gamma_density(),
            S_MIN,
            potential,
            rng=rng,
            n_inner=4,
            n_se=4.0,
        )
        assert report["pass"], (F.name, G.name, report)


def test_inserted_atom_form_rejects_low_supports(samples):
    """Test that inner functions must vanish below the truncation."""
    F, G = cylinder_pairs(WINDOW, "default")[0]
    with pytest.raises(SupportError):
        energy_form_nz(F, G, samples[:5], gamma_density(), 0.1)
