"""Test test functions, cylinder functions, gradient and generator."""
import numpy as np
import pytest

from kone.calculus.bumps import Bump1D, ProductBump
from kone.calculus.cylinder import (
    ConstantOuter,
    CylinderFunction,
    GaussianOuter,
    LinearOuter,
    ProductOuter,
    TangentVector,
    TanhOuter,
)
from kone.calculus.generator import (
    directional_derivative,
    directional_derivative_fd,
    generator_apply,
    generator_apply_gamma,
    generator_terms,
    gradK,
    square_field,
)
from kone.measure.core import DiscreteMeasure, Window
from kone.sampling.intensity import (
    BumpField,
    CustomDensity,
    ExponentialDensity,
    gamma_density,
)
from kone.sampling.potentials import SmoothstepRepulsion
from kone.verify.battery import battery_bumps, cylinder_pairs

WINDOW = Window.cube(2, 0.0, 4.0)
POTENTIAL = SmoothstepRepulsion(height=2.0, range=1.0, delta=0.25)


@pytest.fixture
def eta():
    rng = np.random.default_rng(0)
    positions = rng.uniform(1.5, 2.5, size=(6, 2))
    weights = rng.uniform(0.2, 1.5, size=6)
    return DiscreteMeasure(positions, weights, WINDOW)


def _all_functions():
    pairs = cylinder_pairs(WINDOW, "default")
    seen = {}
    for F, G in pairs:
        seen[F.name] = F
        seen[G.name] = G
    return list(seen.values())


def test_bump_derivatives_match_differences():
    """Test the exact derivatives of a one-dimensional bump."""
    bump = Bump1D(1.0, 0.5)
    t = np.linspace(0.6, 1.4, 17)
    h = 1e-5
    first = (bump.value(t + h) - bump.value(t - h)) / (2 * h)
    second = (
        bump.value(t + h) - 2 * bump.value(t) + bump.value(t - h)
    ) / h**2
    np.testing.assert_allclose(bump.derivative(t), first, atol=1e-6)
    np.testing.assert_allclose(bump.second_derivative(t), second, atol=1e-3)
    assert bump.value(np.array([0.4, 1.6])).tolist() == [0.0, 0.0]


def test_product_bump_derivatives_match_differences():
    """Test the weight and position derivatives of a product bump."""
    f = ProductBump.box((0.2, 2.0), (0.5, 0.5), (1.5, 1.5), power=1.0)
    s = np.array([0.7, 1.1])
    x = np.array([[0.9, 1.2], [1.1, 0.8]])
    h = 1e-5
    d_s = (f(s + h, x) - f(s - h, x)) / (2 * h)
    d2_s = (f(s + h, x) - 2 * f(s, x) + f(s - h, x)) / h**2
    np.testing.assert_allclose(f.d_s(s, x), d_s, atol=1e-6)
    np.testing.assert_allclose(f.d2_s(s, x), d2_s, atol=1e-3)
    lap = np.zeros(2)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        grad = (f(s, x + step) - f(s, x - step)) / (2 * h)
        np.testing.assert_allclose(f.grad_x(s, x)[:, axis], grad, atol=1e-6)
        lap += (f(s, x + step) - 2 * f(s, x) + f(s, x - step)) / h**2
    np.testing.assert_allclose(f.lap_x(s, x), lap, atol=1e-3)


def test_product_bump_needs_positive_weights():
    """Test that the weight support must avoid zero."""
    with pytest.raises(ValueError):
        ProductBump(Bump1D(0.1, 0.2), [Bump1D(0.0, 1.0)])


@pytest.mark.parametrize(
    "outer, y",
    [
        (TanhOuter([0.5, -1.0]), np.array([0.3, 0.7])),
        (GaussianOuter([0.5, 0.1], 0.8), np.array([0.3, 0.7])),
        (ProductOuter(3), np.array([0.3, 0.7, -1.2])),
    ],
)
def test_outer_derivatives_match_differences(outer, y):
    """Test outer gradients and Hessians against differences."""
    h = 1e-6
    n = len(y)
    grad = np.empty(n)
    hess = np.empty((n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        grad[j] = (outer.value(y + step) - outer.value(y - step)) / (2 * h)
        hess[j] = (outer.grad(y + step) - outer.grad(y - step)) / (2 * h)
    np.testing.assert_allclose(outer.grad(y), grad, atol=1e-8)
    np.testing.assert_allclose(outer.hess(y), hess, atol=1e-7)


def test_cylinder_function_value(eta):
    """Test F(eta) = g(<<phi_j, eta>>)."""
    bumps = battery_bumps(WINDOW)
    F = CylinderFunction(
        LinearOuter([2.0, -1.0], offset=0.5), [bumps["a"], bumps["b"]]
    )
    a = float(np.sum(bumps["a"](eta.weights, eta.positions)))
    b = float(np.sum(bumps["b"](eta.weights, eta.positions)))
    assert F(eta) == pytest.approx(0.5 + 2.0 * a - b)
    assert F(DiscreteMeasure.empty(WINDOW)) == 0.5


def test_tangent_vectors_check_their_base_point():
    """Test that tangent vectors at different measures do not pair."""
    u = TangentVector(np.ones((2, 2)), np.ones(2), np.array([1.0, 2.0]))
    v = TangentVector(np.ones((2, 2)), np.ones(2), np.array([1.0, 3.0]))
    assert u.norm2() == pytest.approx(9.0)
    with pytest.raises(ValueError):
        u.inner(v)


def test_square_field_is_norm_of_gradient(eta):
    """Test Gamma(F) = <gradK F, gradK F>."""
    for F in _all_functions():
        assert square_field(F, eta) == pytest.approx(
            gradK(F, eta).norm2(), rel=1e-12
        )


def test_gamma_fast_path_matches_general_generator(eta):
    """Test the specialised gamma generator against the general one."""
    for F in _all_functions():
        for potential in (None, POTENTIAL):
            general = generator_apply(F, eta, gamma_density(), potential)
            fast = generator_apply_gamma(F, eta, potential)
            assert fast == pytest.approx(general, rel=1e-10, abs=1e-10)


def test_generator_of_linear_function_without_interaction(eta):
    """Test L<<phi, .>> = sum (1/s) Lap_x phi + s phi'' - s phi'."""
    f = battery_bumps(WINDOW)["a"]
    F = CylinderFunction(LinearOuter([1.0]), [f])
    s, x = eta.weights, eta.positions
    expected = np.sum(
        f.lap_x(s, x) / s + s * f.d2_s(s, x) - s * f.d_s(s, x)
    )
    assert generator_apply(F, eta, gamma_density()) == pytest.approx(
        expected, rel=1e-10, abs=1e-12
    )


def test_generator_terms_with_spatial_density(eta):
    """Test that the position log-derivative term appears for a
    non-constant field."""
    field = BumpField(1.0, 0.5, (2.0, 2.0), 1.5)
    density = ExponentialDensity(1.0, field)
    F = _all_functions()[0]
    terms = generator_terms(F, eta, density)
    assert set(terms) == {
        "laplace_x",
        "log_density_x",
        "interaction_x",
        "laplace_s",
        "log_density_s",
        "interaction_s",
    }
    assert np.any(terms["log_density_x"] != 0.0)
    assert np.all(terms["interaction_x"] == 0.0)


def test_generator_of_constant_is_zero(eta):
    """Test that constants are annihilated."""
    f = battery_bumps(WINDOW)["a"]
    F = CylinderFunction(ConstantOuter(3.0), [f])
    assert generator_apply(F, eta, gamma_density(), POTENTIAL) == 0.0
    assert square_field(F, eta) == 0.0


def test_generator_on_empty_measure():
    """Test the generator at the empty configuration."""
    F = _all_functions()[0]
    empty = DiscreteMeasure.empty(WINDOW)
    assert generator_apply(F, empty, gamma_density()) == 0.0
    assert generator_apply_gamma(F, empty) == 0.0


def test_generator_needs_density_derivatives(eta):
    """Test that a custom density without derivatives is refused."""
    density = CustomDensity(
        lambda s, x: np.exp(-s) * np.ones(len(x)), gamma_density()
    )
    with pytest.raises(ValueError):
        generator_apply(_all_functions()[0], eta, density)


def test_directional_derivative_matches_flow(eta):
    """Test the tangent pairing against differences along the flow."""

    def v(x):
        return np.column_stack([np.sin(x[:, 1]), 0.5 * np.ones(len(x))])

    def h(x):
        return 0.3 * x[:, 0] - 0.2

    for F in _all_functions():
        exact = directional_derivative(F, eta, v, h)
        numeric = directional_derivative_fd(F, eta, v, h)
        assert numeric.estimate == pytest.approx(exact, rel=1e-6, abs=1e-9)
        assert len(numeric.central) == 3
