"""Finite-volume Gibbs perturbations of the completely random measure.

The target is the local specification

    mu_Lambda(d eta | xi) = Z^-1 exp(-H(eta | xi)) nu_Lambda(d eta)

with reference ``nu_Lambda`` the truncated completely random measure on
the window and ``H`` the pair Hamiltonian of :func:`hamiltonian_local`.
It is sampled with a Metropolis-Hastings chain mixing birth, death,
weight-resample and position moves.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from kone.errors import (
    EmptySampleError,
    InvalidMeasureError,
    NonFiniteStateError,
    SupportError,
)
from kone.measure.core import DiscreteMeasure, Window
from kone.parameters import (
    DEFAULT_MCMC_PARAMETERS,
    DENSE_START,
    ENERGY_CHECK_RTOL,
    N_CHAINS,
    N_SE,
    RHAT_MAX,
)
from kone.sampling.cells import CellList, cross_pairs, neighbour_pairs
from kone.sampling.crm import sample_crm
from kone.sampling.intensity import WeightDensity
from kone.sampling.potentials import PairPotential
from kone.types import (
    Functional,
    GibbsSamples,
    IdentityReport,
    McmcParams,
)
from kone.utils.parallel import map_replicas
from kone.utils.rng import get_rng
from kone.verify.stats import (
    effective_sample_size,
    gelman_rubin,
    identity_report,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MOVES",
    "GibbsChainState",
    "birth_log_ratio",
    "death_log_ratio",
    "dispersed_initials",
    "filter_boundary",
    "gibbs_step",
    "hamiltonian_local",
    "interaction_fields",
    "move_log_ratio",
    "nz_check",
    "rejection_sample_gibbs",
    "relative_energy",
    "sample_gibbs",
    "sample_gibbs_chains",
    "weight_log_ratio",
]

MOVES = ("birth", "death", "weight", "move")


def _distance_to_box(window: Window, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    lo = np.asarray(window.lo)
    hi = np.asarray(window.hi)
    outside = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return np.linalg.norm(outside, axis=1)


def filter_boundary(
    window: Window,
    boundary: Optional[DiscreteMeasure],
    range: float,
) -> Optional[DiscreteMeasure]:
    """Keep the boundary atoms within ``range`` of the window.

    Raises
    ------
    InvalidMeasureError
        If a boundary atom lies inside the window, or if a boundary is
        given for a periodic window.
    """
    if boundary is None or len(boundary) == 0:
        return None
    if window.periodic:
        raise InvalidMeasureError(
            "periodic windows do not take a boundary condition"
        )
    lo = np.asarray(window.lo)
    hi = np.asarray(window.hi)
    inside = np.all(
        (boundary.positions > lo) & (boundary.positions < hi), axis=1
    )
    if np.any(inside):
        raise InvalidMeasureError(
            f"{int(inside.sum())} boundary atoms lie inside the window"
        )
    keep = _distance_to_box(window, boundary.positions) <= range
    return DiscreteMeasure(
        boundary.positions[keep],
        boundary.weights[keep],
        boundary.window,
    )


def _check_periodic_range(window: Window, range: float) -> None:
    if window.periodic and np.any(window.lengths < 2 * range):
        raise InvalidMeasureError(
            "periodic window must be at least twice the potential range"
        )


def hamiltonian_local(
    eta: DiscreteMeasure,
    boundary: Optional[DiscreteMeasure],
    potential: PairPotential,
) -> float:
    """Relative energy ``H(eta | xi)``.

    ``1/2 sum_{i != j} s_i s_j phi(x_i, x_j) + sum_{i, b} s_i s_b phi(x_i,
    x_b)``, summing only over pairs within the interaction range.

    Raises
    ------
    InvalidMeasureError
        If the window is periodic and shorter than twice the range.
    """
    if potential.is_zero or len(eta) == 0:
        return 0.0
    window = eta.window
    _check_periodic_range(window, potential.range)
    s = eta.weights
    x = eta.positions
    pairs = neighbour_pairs(window, x, potential.range)
    energy = 0.0
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        energy += float(np.sum(s[i] * s[j] * potential(x[i], x[j], window)))
    if boundary is not None and len(boundary):
        cross = cross_pairs(x, boundary.positions, potential.range)
        if len(cross):
            i, b = cross[:, 0], cross[:, 1]
            energy += float(
                np.sum(
                    s[i]
                    * boundary.weights[b]
                    * potential(x[i], boundary.positions[b])
                )
            )
    return energy


def relative_energy(
    s: float,
    x: np.ndarray,
    eta: DiscreteMeasure,
    potential: PairPotential,
    boundary: Optional[DiscreteMeasure] = None,
) -> float:
    """``s sum_j s_j phi(x, x_j)`` over the atoms of ``eta`` (and of the
    boundary, if given)."""
    if potential.is_zero:
        return 0.0
    x = np.asarray(x, dtype=float)
    total = 0.0
    if len(eta):
        total += float(
            np.dot(eta.weights, potential(x, eta.positions, eta.window))
        )
    if boundary is not None and len(boundary):
        total += float(
            np.dot(boundary.weights, potential(x, boundary.positions))
        )
    return float(s) * total


def interaction_fields(
    weights: np.ndarray,
    positions: np.ndarray,
    window: Window,
    potential: PairPotential,
    boundary: Optional[DiscreteMeasure] = None,
):
    """Per-atom interaction field and its gradient.

    Returns ``field[i] = sum_{k != i} s_k phi(x_i, x_k)`` and
    ``grad[i] = sum_{k != i} s_k grad_x phi(x_i, x_k)``, the sums running
    over the other atoms and the boundary atoms within range.
    """
    n, dim = positions.shape
    field = np.zeros(n)
    grad = np.zeros((n, dim))
    if potential.is_zero or n == 0:
        return field, grad
    pairs = neighbour_pairs(window, positions, potential.range)
    if len(pairs):
        i, k = pairs[:, 0], pairs[:, 1]
        value = potential(positions[i], positions[k], window)
        slope = potential.grad_x(positions[i], positions[k], window)
        np.add.at(field, i, weights[k] * value)
        np.add.at(field, k, weights[i] * value)
        np.add.at(grad, i, weights[k][:, None] * slope)
        np.add.at(grad, k, -weights[i][:, None] * slope)
    if boundary is not None and len(boundary):
        cross = cross_pairs(positions, boundary.positions, potential.range)
        if len(cross):
            i, b = cross[:, 0], cross[:, 1]
            y = boundary.positions[b]
            s_b = boundary.weights[b]
            np.add.at(field, i, s_b * potential(positions[i], y))
            np.add.at(
                grad, i, s_b[:, None] * potential.grad_x(positions[i], y)
            )
    return field, grad


def birth_log_ratio(
    mass: float,
    n: int,
    delta_h: float,
    p_birth: float,
    p_death: float,
) -> float:
    """Log acceptance ratio of adding an atom drawn from the normalised
    truncated intensity to a state with ``n`` atoms."""
    return (
        np.log(mass) - np.log(n + 1) - delta_h + np.log(p_death / p_birth)
    )


def death_log_ratio(
    mass: float,
    n: int,
    delta_h: float,
    p_birth: float,
    p_death: float,
) -> float:
    """Log acceptance ratio of removing one of ``n`` atoms whose relative
    energy is ``delta_h``."""
    return np.log(n) - np.log(mass) + delta_h + np.log(p_birth / p_death)


def weight_log_ratio(delta_h: float) -> float:
    """Weight redrawn from its conditional reference law: only the energy
    change remains."""
    return -delta_h


def move_log_ratio(
    log_l_new: float,
    log_l_old: float,
    delta_h: float,
) -> float:
    """Symmetric position proposal: density ratio of the intensity times
    the Boltzmann factor."""
    return log_l_new - log_l_old - delta_h


class GibbsChainState:
    """Mutable state of one Metropolis-Hastings chain.

    Atoms are stored in growable arrays; removing an atom moves the last
    atom into its slot. The cached energy is updated incrementally.

    Parameters
    ----------
    eta : DiscreteMeasure
        Initial configuration in the window.
    potential : PairPotential
        Pair potential.
    density : WeightDensity
        Weight density of the reference measure.
    s_min : float
        Weight truncation of the reference measure.
    boundary : DiscreteMeasure, optional
        Boundary condition outside the window.
    """

    def __init__(
        self,
        eta: DiscreteMeasure,
        potential: PairPotential,
        density: WeightDensity,
        s_min: float,
        boundary: Optional[DiscreteMeasure] = None,
    ):
        self.window = eta.window
        _check_periodic_range(self.window, potential.range)
        self.potential = potential
        self.density = density
        self.s_min = float(s_min)
        self.boundary = filter_boundary(self.window, boundary, potential.range)
        self.mass = density.sigma_mass(self.window, self.s_min)

        dim = self.window.dim
        capacity = max(16, 2 * len(eta))
        self._positions = np.zeros((capacity, dim))
        self._weights = np.zeros(capacity)
        self.n = len(eta)
        self._positions[: self.n] = eta.positions
        self._weights[: self.n] = eta.weights

        self.cells = CellList(self.window, potential.range)
        for i in range(self.n):
            self.cells.insert(i, self._positions[i])
        self.boundary_cells = CellList(self.window, potential.range)
        if self.boundary is not None:
            for b, x in enumerate(self.boundary.positions):
                self.boundary_cells.insert(b, x)

        self.energy = hamiltonian_local(eta, self.boundary, potential)
        self.steps = 0
        self.counts: Dict[str, List[int]] = {m: [0, 0] for m in MOVES}

    @property
    def positions(self) -> np.ndarray:
        return self._positions[: self.n]

    @property
    def weights(self) -> np.ndarray:
        return self._weights[: self.n]

    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(
            self.positions.copy(),
            self.weights.copy(),
            self.window,
            {"s_min": self.s_min, "energy": self.energy},
        )

    def local_field(self, x: np.ndarray, exclude: Optional[int] = None):
        """``sum_j s_j phi(x, x_j)`` over the other atoms and the boundary."""
        if self.potential.is_zero:
            return 0.0
        ids, delta = self.cells.neighbours(x, self._positions, exclude)
        total = 0.0
        if len(ids):
            r = np.linalg.norm(delta, axis=1)
            total += float(
                np.dot(self._weights[ids], self.potential.radial(r))
            )
        if self.boundary is not None:
            ids, delta = self.boundary_cells.neighbours(
                x, self.boundary.positions
            )
            if len(ids):
                r = np.linalg.norm(delta, axis=1)
                total += float(
                    np.dot(
                        self.boundary.weights[ids], self.potential.radial(r)
                    )
                )
        return total

    def _grow(self):
        self._positions = np.vstack(
            [self._positions, np.zeros_like(self._positions)]
        )
        self._weights = np.concatenate(
            [self._weights, np.zeros_like(self._weights)]
        )

    def add(self, s: float, x: np.ndarray, delta_h: float):
        if self.n == len(self._weights):
            self._grow()
        self._positions[self.n] = x
        self._weights[self.n] = s
        self.cells.insert(self.n, x)
        self.n += 1
        self.energy += delta_h

    def remove(self, index: int, delta_h: float):
        last = self.n - 1
        self.cells.remove(index)
        if index != last:
            self._positions[index] = self._positions[last]
            self._weights[index] = self._weights[last]
            self.cells.relabel(last, index)
        self.n -= 1
        self.energy -= delta_h

    def recompute_energy(self) -> float:
        return hamiltonian_local(
            DiscreteMeasure(self.positions, self.weights, self.window),
            self.boundary,
            self.potential,
        )

    def check_energy(self, rtol: float = ENERGY_CHECK_RTOL):
        """Compare the cached energy with a full recomputation.

        The tolerance is relative to ``max(|H|, 1)``. The cache is reset to
        the recomputed value.

        Raises
        ------
        NonFiniteStateError
            If the energy is not finite.
        RuntimeError
            If the cached energy drifted beyond the tolerance.
        """
        full = self.recompute_energy()
        if not np.isfinite(full) or not np.isfinite(self.energy):
            raise NonFiniteStateError(
                "energy is not finite",
                dump={
                    "positions": self.positions.tolist(),
                    "weights": self.weights.tolist(),
                    "energy": self.energy,
                },
            )
        if abs(full - self.energy) > rtol * max(abs(full), 1.0):
            raise RuntimeError(
                f"cached energy {self.energy!r} differs from the "
                f"recomputed energy {full!r}"
            )
        self.energy = full

    def acceptance_rates(self) -> Dict[str, float]:
        return {
            move: (accepted / proposed if proposed else 0.0)
            for move, (proposed, accepted) in self.counts.items()
        }


def _accept(log_ratio: float, rng: np.random.Generator) -> bool:
    return bool(np.log(rng.uniform()) < log_ratio)


def _birth(state: GibbsChainState, params, rng) -> bool:
    p_birth, p_death = params["move_probs"][0], params["move_probs"][1]
    s, x = state.density.sample_points(state.window, state.s_min, 1, rng)
    s, x = float(s[0]), x[0]
    delta_h = s * state.local_field(x)
    log_ratio = birth_log_ratio(state.mass, state.n, delta_h, p_birth, p_death)
    if not _accept(log_ratio, rng):
        return False
    state.add(s, x, delta_h)
    return True


def _death(state: GibbsChainState, params, rng) -> bool:
    if state.n == 0:
        return False
    p_birth, p_death = params["move_probs"][0], params["move_probs"][1]
    i = int(rng.integers(state.n))
    s = state.weights[i]
    delta_h = s * state.local_field(state.positions[i], exclude=i)
    log_ratio = death_log_ratio(state.mass, state.n, delta_h, p_birth, p_death)
    if not _accept(log_ratio, rng):
        return False
    state.remove(i, delta_h)
    return True


def _weight(state: GibbsChainState, params, rng) -> bool:
    if state.n == 0:
        return False
    i = int(rng.integers(state.n))
    x = state.positions[i]
    s_new = float(state.density.sample_weights(x[None], state.s_min, rng)[0])
    field = state.local_field(x, exclude=i)
    delta_h = (s_new - state.weights[i]) * field
    if not _accept(weight_log_ratio(delta_h), rng):
        return False
    state._weights[i] = s_new
    state.energy += delta_h
    return True


def _move(state: GibbsChainState, params, rng) -> bool:
    if state.n == 0:
        return False
    window = state.window
    i = int(rng.integers(state.n))
    s = state.weights[i]
    x = state.positions[i].copy()
    x_new = x + params["jump_scale"] * rng.standard_normal(window.dim)
    if window.periodic:
        x_new = window.wrap(x_new)
    elif not window.contains(x_new)[0]:
        return False
    delta_h = s * (
        state.local_field(x_new, exclude=i) - state.local_field(x, exclude=i)
    )
    log_l = np.log(state.density(np.array([s, s]), np.stack([x_new, x])))
    if not _accept(move_log_ratio(log_l[0], log_l[1], delta_h), rng):
        return False
    state._positions[i] = x_new
    state.cells.update(i, x_new)
    state.energy += delta_h
    return True


_MOVE_FUNCTIONS = {
    "birth": _birth,
    "death": _death,
    "weight": _weight,
    "move": _move,
}


def gibbs_step(
    state: GibbsChainState,
    params: McmcParams,
    rng: np.random.Generator,
) -> GibbsChainState:
    """Apply one Metropolis-Hastings move to ``state`` in place.

    The move type is drawn from ``params["move_probs"]``. Every
    ``params["check_every"]`` steps the cached energy is compared with a
    full recomputation.
    """
    move = MOVES[int(rng.choice(len(MOVES), p=params["move_probs"]))]
    accepted = _MOVE_FUNCTIONS[move](state, params, rng)
    state.counts[move][0] += 1
    state.counts[move][1] += int(accepted)
    state.steps += 1
    if not np.isfinite(state.energy):
        raise NonFiniteStateError(
            f"energy became non-finite after a {move} move",
            dump={
                "positions": state.positions.tolist(),
                "weights": state.weights.tolist(),
            },
        )
    check_every = params.get("check_every", 0)
    if check_every and state.steps % check_every == 0:
        state.check_energy()
    return state


def sample_gibbs(
    window: Window,
    boundary: Optional[DiscreteMeasure],
    potential: PairPotential,
    density: WeightDensity,
    params: Optional[McmcParams] = None,
    rng: Optional[np.random.Generator] = None,
    initial: Optional[DiscreteMeasure] = None,
) -> GibbsSamples:
    """Run a chain targeting the local specification on ``window``.

    Parameters
    ----------
    window : Window
        The finite volume. Periodic windows use minimum image distances
        and take no boundary condition.
    boundary : DiscreteMeasure, optional
        Boundary condition; atoms farther than the range are ignored.
    potential : PairPotential
        Pair potential.
    density : WeightDensity
        Weight density of the reference measure.
    params : McmcParams, optional
        Chain parameters; defaults from ``kone.parameters``.
    rng : np.random.Generator, optional
        Random stream.
    initial : DiscreteMeasure, optional
        Starting configuration. Defaults to a reference sample.

    Returns
    -------
    GibbsSamples
        Thinned samples with acceptance rates, energy and count traces and
        the effective sample size of the energy trace.
    """
    params = {**DEFAULT_MCMC_PARAMETERS, **(params or {})}
    if not np.isclose(sum(params["move_probs"]), 1.0):
        raise ValueError("move probabilities must sum to 1")
    rng = get_rng(rng)
    s_min = params["s_min"]
    if initial is None:
        initial = sample_crm(
            density, {"s_min": s_min, "window": window}, rng=rng
        )
    state = GibbsChainState(initial, potential, density, s_min, boundary)

    for _ in range(params["burnin"]):
        gibbs_step(state, params, rng)

    samples = []
    energies = np.empty(params["n_samples"])
    counts = np.empty(params["n_samples"], dtype=int)
    for k in range(params["n_samples"]):
        for _ in range(params["thin"]):
            gibbs_step(state, params, rng)
        samples.append(state.measure())
        energies[k] = state.energy
        counts[k] = state.n
        if not params["quiet"] and (k + 1) % max(1, len(energies) // 10) == 0:
            logger.info(
                "recorded %d/%d samples, %d atoms, energy %.4g",
                k + 1,
                len(energies),
                state.n,
                state.energy,
            )

    diagnostics = {
        "acceptance": state.acceptance_rates(),
        "energy_trace": energies,
        "count_trace": counts,
        "ess": effective_sample_size(energies),
    }
    logger.debug("acceptance rates %s", diagnostics["acceptance"])
    return GibbsSamples(samples, diagnostics)


def dispersed_initials(
    window: Window,
    density: WeightDensity,
    s_min: float,
    n_chains: int,
    rng: Optional[np.random.Generator] = None,
    factor: float = DENSE_START,
) -> List[DiscreteMeasure]:
    """Starting configurations alternating empty and dense.

    Even chains start from the empty measure. Odd chains start from
    ``Poisson(factor * sigma_mass)`` atoms of the truncated intensity,
    several times the typical reference count.
    """
    rng = get_rng(rng)
    mass = density.sigma_mass(window, s_min)
    initials = []
    for k in range(n_chains):
        if k % 2 == 0:
            initials.append(DiscreteMeasure.empty(window))
            continue
        n = int(rng.poisson(factor * mass))
        s, x = density.sample_points(window, s_min, n, rng)
        initials.append(DiscreteMeasure(x, s, window))
    return initials


def sample_gibbs_chains(
    window: Window,
    boundary: Optional[DiscreteMeasure],
    potential: PairPotential,
    density: WeightDensity,
    params: Optional[McmcParams] = None,
    rng: Optional[np.random.Generator] = None,
    n_chains: int = N_CHAINS,
    initials: Optional[Sequence[DiscreteMeasure]] = None,
    n_jobs: Optional[int] = None,
) -> GibbsSamples:
    """Run independent chains from dispersed starts and pool them.

    Each chain runs :func:`sample_gibbs` with ``params`` on its own
    stream. Convergence is summarised by the potential scale reduction
    factor of the energy and count traces.

    Parameters
    ----------
    n_chains : int
        Number of chains, at least two.
    initials : sequence of DiscreteMeasure, optional
        One starting configuration per chain. Defaults to
        :func:`dispersed_initials`.
    n_jobs : int, optional
        Workers; the output does not depend on it.

    Returns
    -------
    GibbsSamples
        Samples and traces of every chain in chain order, mean acceptance
        rates, the summed effective sample size, ``rhat`` per trace and
        ``n_chains``.

    Raises
    ------
    ValueError
        If fewer than two chains are requested or ``initials`` does not
        hold one configuration per chain.
    """
    if n_chains < 2:
        raise ValueError("R-hat needs at least two chains")
    params = {**DEFAULT_MCMC_PARAMETERS, **(params or {})}
    rng = get_rng(rng)
    if initials is None:
        initials = dispersed_initials(
            window, density, params["s_min"], n_chains, rng
        )
    if len(initials) != n_chains:
        raise ValueError(
            f"got {len(initials)} initial states for {n_chains} chains"
        )

    def chain(stream: np.random.Generator, index: int) -> GibbsSamples:
        return sample_gibbs(
            window,
            boundary,
            potential,
            density,
            params,
            stream,
            initials[index],
        )

    seed = int(rng.integers(2**63 - 1))
    runs = map_replicas(chain, seed, n_chains, n_jobs)
    energies = np.stack([run.diagnostics["energy_trace"] for run in runs])
    counts = np.stack([run.diagnostics["count_trace"] for run in runs])
    rhat = {"energy": gelman_rubin(energies), "count": gelman_rubin(counts)}
    if max(rhat.values()) > RHAT_MAX:
        logger.warning(
            "chains have not mixed: R-hat energy %.3f, count %.3f",
            rhat["energy"],
            rhat["count"],
        )
    diagnostics = {
        "acceptance": {
            move: float(
                np.mean([run.diagnostics["acceptance"][move] for run in runs])
            )
            for move in MOVES
        },
        "energy_trace": energies.ravel(),
        "count_trace": counts.ravel(),
        "ess": float(sum(run.diagnostics["ess"] for run in runs)),
        "rhat": rhat,
        "n_chains": n_chains,
    }
    samples = [eta for run in runs for eta in run.samples]
    return GibbsSamples(samples, diagnostics)


def rejection_sample_gibbs(
    window: Window,
    potential: PairPotential,
    density: WeightDensity,
    s_min: float,
    n: int,
    rng: Optional[np.random.Generator] = None,
    boundary: Optional[DiscreteMeasure] = None,
) -> List[DiscreteMeasure]:
    """Exact samples for a nonnegative potential.

    Reference samples are accepted with probability ``exp(-H)``, which is
    at most one when the potential has no negative part. Practical only
    on windows holding a few atoms.
    """
    if potential.negative_sup_norm > 0:
        raise ValueError("rejection sampling needs a nonnegative potential")
    rng = get_rng(rng)
    boundary = filter_boundary(window, boundary, potential.range)
    params = {"s_min": s_min, "window": window}
    out: List[DiscreteMeasure] = []
    proposed = 0
    while len(out) < n:
        eta = sample_crm(density, params, rng=rng)
        proposed += 1
        energy = hamiltonian_local(eta, boundary, potential)
        if rng.uniform() < np.exp(-energy):
            out.append(eta)
    logger.debug("rejection oracle acceptance rate %.3f", n / max(proposed, 1))
    return out


def _check_nz_support(F: Functional, window: Window, range: float, s_min):
    support = F.support
    if support.s_lo < 2 * s_min:
        raise SupportError(
            f"functional {F.name} must vanish below 2 * s_min = {2 * s_min}"
        )
    if window.periodic:
        return
    lo = np.asarray(support.lo) - np.asarray(window.lo)
    hi = np.asarray(window.hi) - np.asarray(support.hi)
    if np.any(lo <= range) or np.any(hi <= range):
        raise SupportError(
            f"functional {F.name} must be supported farther than "
            f"{range} from the window boundary"
        )


def nz_check(
    samples: Sequence[DiscreteMeasure],
    density: WeightDensity,
    potential: PairPotential,
    F: Functional,
    s_min: float,
    rng: Optional[np.random.Generator] = None,
    boundary: Optional[DiscreteMeasure] = None,
    n_inner: int = 1,
    n_se: float = N_SE,
) -> IdentityReport:
    """Two-sided check of the Nguyen-Zessin identity on Gibbs samples.

    ``E[sum_x F(s_x, x, eta)] =
    E[int exp(-s int phi(x, .) d eta) F(s, x, eta + s delta_x) dsigma]``

    The sigma-integral is estimated by importance sampling from the
    truncated intensity restricted to the spatial support of ``F``.

    Raises
    ------
    SupportError
        If ``F`` is supported below ``2 s_min`` or within the interaction
        range of the boundary of a non-periodic window, or if its spatial
        support misses the window.
    EmptySampleError
        If ``samples`` is empty.
    """
    if len(samples) == 0:
        raise EmptySampleError("nz_check needs at least one sample")
    window = samples[0].window
    _check_nz_support(F, window, potential.range, s_min)
    rng = get_rng(rng)
    boundary = filter_boundary(window, boundary, potential.range)
    support = F.support
    box = Window(support.lo, support.hi).intersect(window)
    if box is None:
        raise SupportError(
            f"functional {F.name} is supported outside the window"
        )
    s_floor = max(s_min, support.s_lo)
    mass = density.sigma_mass(box, s_floor)

    lhs = np.empty(len(samples))
    rhs = np.empty(len(samples))
    for k, eta in enumerate(samples):
        lhs[k] = (
            float(np.sum(F(eta.weights, eta.positions, eta)))
            if len(eta)
            else 0.0
        )
        s, x = density.sample_points(box, s_floor, n_inner, rng)
        values = np.empty(n_inner)
        for j in range(n_inner):
            energy = relative_energy(s[j], x[j], eta, potential, boundary)
            bigger = eta.add_atom(s[j], x[j])
            values[j] = np.exp(-energy) * float(
                F(s[j : j + 1], x[j : j + 1], bigger)[0]
            )
        rhs[k] = mass * float(np.mean(values))
    return identity_report(lhs, rhs, n_se=n_se)
