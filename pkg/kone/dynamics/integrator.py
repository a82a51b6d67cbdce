"""Euler-Maruyama integration of the interacting atom diffusion.

Every atom ``(s_i, x_i)`` follows

    dx_i = b_x dt + sqrt(2 / s_i) dB_i
    ds_i = b_s dt + sqrt(2 s_i) dW_i

with the drift of :func:`drift`. Positions are wrapped on periodic windows
and reflected at the faces of other windows; weights are reflected into
``[s_min, s_max]``. Atoms are never created or removed.
"""
import logging
import warnings
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from kone.errors import InvalidMeasureError, NonFiniteStateError
from kone.measure.core import DiscreteMeasure
from kone.parameters import DEFAULT_DIFFUSION_PARAMETERS, REFLECTION_FLAG_RATE
from kone.sampling.cells import CellList
from kone.sampling.gibbs import filter_boundary, interaction_fields
from kone.sampling.intensity import WeightDensity
from kone.sampling.potentials import PairPotential, ZeroPotential
from kone.types import DiffusionParams, Observable, Trajectory
from kone.utils.rng import get_rng

logger = logging.getLogger(__name__)

__all__ = [
    "SimulationState",
    "drift",
    "drifts",
    "em_step",
    "em_update",
    "reflect_into",
    "run_trajectory",
]


def reflect_into(
    values: np.ndarray,
    lo,
    hi,
) -> Tuple[np.ndarray, np.ndarray]:
    """Mirror ``values`` into ``[lo, hi]``.

    Returns the reflected values and a mask of the entries that were
    outside.
    """
    values = np.asarray(values, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    outside = (values < lo) | (values > hi)
    if not np.any(outside):
        return values, outside
    length = hi - lo
    folded = np.mod(values - lo, 2.0 * length)
    folded = np.where(folded > length, 2.0 * length - folded, folded)
    return np.where(outside, lo + folded, values), outside


class SimulationState:
    """Mutable state of one trajectory.

    Parameters
    ----------
    eta : DiscreteMeasure
        Initial configuration.
    density : WeightDensity
        Weight density ``l``.
    potential : PairPotential, optional
        Pair potential; ``None`` for independent atoms.
    params : DiffusionParams, optional
        Time step and weight barriers.
    rng : np.random.Generator, optional
        Private random stream.
    boundary : DiscreteMeasure, optional
        Frozen atoms outside a non-periodic window.
    allow_1d : bool
        Permit one-dimensional windows (with a warning).
    noise : bool
        Set to False to integrate the drift only.
    """

    def __init__(
        self,
        eta: DiscreteMeasure,
        density: WeightDensity,
        potential: Optional[PairPotential] = None,
        params: Optional[DiffusionParams] = None,
        rng: Optional[np.random.Generator] = None,
        boundary: Optional[DiscreteMeasure] = None,
        allow_1d: bool = False,
        noise: bool = True,
    ):
        params = {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})}
        if eta.dim < 2:
            if not allow_1d:
                raise ValueError(
                    "diffusion runs need dimension at least 2; pass "
                    "allow_1d=True for one-dimensional test runs"
                )
            warnings.warn(
                "running the diffusion in dimension 1", stacklevel=2
            )
        if params["dt"] < 0:
            raise ValueError(f"dt must be nonnegative, got {params['dt']}")
        if not 0 < params["s_min"] < params["s_max"]:
            raise ValueError("need 0 < s_min < s_max")
        if len(eta) and (
            eta.weights.min() < params["s_min"]
            or eta.weights.max() > params["s_max"]
        ):
            raise InvalidMeasureError(
                "initial weights must lie in [s_min, s_max]"
            )

        self.window = eta.window
        self.density = density
        self.potential = potential
        self.dt = float(params["dt"])
        self.s_min = float(params["s_min"])
        self.s_max = float(params["s_max"])
        self.rng = get_rng(rng)
        self.noise = noise
        self.boundary = (
            filter_boundary(self.window, boundary, potential.range)
            if potential is not None
            else None
        )
        self.positions = np.array(eta.positions, dtype=float)
        self.weights = np.array(eta.weights, dtype=float)
        self.t = 0.0
        self.steps = 0
        self.weight_reflections = 0
        self.position_reflections = 0

        cutoff = potential.range if potential is not None else 1.0
        self.cells = CellList(self.window, cutoff)
        for i, x in enumerate(self.positions):
            self.cells.insert(i, x)
        self.boundary_cells = CellList(self.window, cutoff)
        if self.boundary is not None:
            for b, x in enumerate(self.boundary.positions):
                self.boundary_cells.insert(b, x)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def reflection_rate(self) -> float:
        """Fraction of weight updates reflected at a barrier."""
        updates = self.steps * self.n
        return self.weight_reflections / updates if updates else 0.0

    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(
            self.positions.copy(),
            self.weights.copy(),
            self.window,
            {"t": self.t, "s_min": self.s_min, "s_max": self.s_max},
        )

    def dump(self) -> dict:
        return {
            "t": self.t,
            "positions": self.positions.tolist(),
            "weights": self.weights.tolist(),
        }


def _potential(state: SimulationState) -> PairPotential:
    return state.potential if state.potential is not None else ZeroPotential()


def drift(state: SimulationState, i: int) -> Tuple[np.ndarray, float]:
    """Drift ``(b_x, b_s)`` of atom ``i``.

    ``b_x = (1/s) grad_x log l - sum_{j != i} s_j grad_x phi(x_i, x_j)``
    and ``b_s = s d_s log l - s sum_{j != i} s_j phi(x_i, x_j)``, the sums
    running over the neighbours found in the cell list.
    """
    s = state.weights[i]
    x = state.positions[i]
    s_arr = np.array([s])
    x_arr = x[None]
    b_x = state.density.grad_log_x(s_arr, x_arr)[0] / s
    b_s = s * float(state.density.d_log_s(s_arr, x_arr)[0])
    potential = _potential(state)
    if potential.is_zero:
        return b_x, b_s

    field = 0.0
    grad = np.zeros(state.window.dim)
    ids, delta = state.cells.neighbours(x, state.positions, exclude=i)
    sources = [(state.weights[ids], delta)]
    if state.boundary is not None:
        ids, delta = state.boundary_cells.neighbours(
            x, state.boundary.positions
        )
        sources.append((state.boundary.weights[ids], delta))
    for weights, delta in sources:
        if len(weights) == 0:
            continue
        r = np.linalg.norm(delta, axis=1)
        field += float(np.dot(weights, potential.radial(r)))
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(r > 0, -potential.radial_derivative(r) / r, 0.0)
        grad += (weights * factor) @ delta
    return b_x - grad, b_s - s * field


def drifts(state: SimulationState) -> Tuple[np.ndarray, np.ndarray]:
    """Drifts of all atoms at once, shapes ``(n, d)`` and ``(n,)``."""
    s = state.weights
    x = state.positions
    b_x = state.density.grad_log_x(s, x) / s[:, None]
    b_s = s * state.density.d_log_s(s, x)
    potential = _potential(state)
    if potential.is_zero or state.n == 0:
        return b_x, b_s
    field, grad = interaction_fields(
        s, x, state.window, potential, state.boundary
    )
    return b_x - grad, b_s - s * field


def em_update(
    state: SimulationState,
    xi_x: Optional[np.ndarray],
    xi_s: Optional[np.ndarray],
):
    """One Euler-Maruyama update for given standard normal draws.

    Leaves ``state`` untouched. ``xi_x`` and ``xi_s`` may be ``None`` for
    a drift-only update.

    Returns
    -------
    positions, weights : np.ndarray
        The updated atoms, wrapped or reflected into the window and the
        weight barriers.
    weight_hits, position_hits : np.ndarray
        Masks of the reflected weights and positions.

    Raises
    ------
    NonFiniteStateError
        If a position or weight becomes non-finite.
    """
    dt = state.dt
    window = state.window
    s = state.weights
    b_x, b_s = drifts(state)
    x_new = state.positions + b_x * dt
    s_new = s + b_s * dt
    if xi_x is not None:
        x_new = x_new + np.sqrt(2.0 * dt / s)[:, None] * xi_x
    if xi_s is not None:
        s_new = s_new + np.sqrt(2.0 * s * dt) * xi_s

    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(s_new))):
        raise NonFiniteStateError(
            f"state became non-finite at t = {state.t}", dump=state.dump()
        )

    s_new, weight_hits = reflect_into(s_new, state.s_min, state.s_max)
    if window.periodic:
        x_new = window.wrap(x_new)
        position_hits = np.zeros(state.n, dtype=bool)
    else:
        x_new, hit = reflect_into(x_new, window.lo, window.hi)
        position_hits = np.any(hit, axis=1)
    return x_new, s_new, weight_hits, position_hits


def em_step(state: SimulationState) -> SimulationState:
    """Advance ``state`` by one Euler-Maruyama step in place.

    Raises
    ------
    NonFiniteStateError
        If a position or weight becomes non-finite.
    """
    if state.n == 0 or state.dt == 0.0:
        state.t += state.dt
        state.steps += 1
        return state
    xi_x = xi_s = None
    if state.noise:
        xi_x = state.rng.standard_normal(state.positions.shape)
        xi_s = state.rng.standard_normal(state.n)
    x_new, s_new, weight_hits, position_hits = em_update(state, xi_x, xi_s)
    state.weight_reflections += int(weight_hits.sum())
    state.position_reflections += int(position_hits.sum())
    state.positions = x_new
    state.weights = s_new
    # the cell list only serves interaction sums
    if not _potential(state).is_zero:
        for i in range(state.n):
            state.cells.update(i, x_new[i])
    state.t += state.dt
    state.steps += 1
    return state


def _record(eta: DiscreteMeasure, t: float, observables) -> dict:
    row = {"t": t}
    for observable in observables:
        row[observable.name] = observable(eta)
    return row


def run_trajectory(
    initial: DiscreteMeasure,
    density: WeightDensity,
    potential: Optional[PairPotential],
    observables: Sequence[Observable],
    params: Optional[DiffusionParams] = None,
    rng: Optional[np.random.Generator] = None,
    boundary: Optional[DiscreteMeasure] = None,
    allow_1d: bool = False,
) -> Trajectory:
    """Integrate up to time ``T`` and record observables.

    The observables are evaluated at ``t = 0``, every
    ``record_every`` steps and at the final time.

    Returns
    -------
    Trajectory
        Time series, final state and weight reflection rate. Runs whose
        reflection rate exceeds one percent are flagged with a warning.
    """
    params = {**DEFAULT_DIFFUSION_PARAMETERS, **(params or {})}
    state = SimulationState(
        initial,
        density,
        potential,
        params,
        rng=rng,
        boundary=boundary,
        allow_1d=allow_1d,
    )
    n_steps = int(round(params["T"] / params["dt"])) if params["dt"] else 0
    every = max(1, int(params["record_every"]))
    rows = [_record(initial, 0.0, observables)]
    for step in range(1, n_steps + 1):
        em_step(state)
        if step % every == 0 or step == n_steps:
            rows.append(_record(state.measure(), state.t, observables))

    rate = state.reflection_rate
    if rate > REFLECTION_FLAG_RATE:
        message = (
            f"weight reflection rate {rate:.3%} exceeds "
            f"{REFLECTION_FLAG_RATE:.0%}"
        )
        logger.warning(message)
        warnings.warn(message, stacklevel=2)
    logger.debug(
        "integrated %d steps of %d atoms, reflection rate %.4f",
        n_steps,
        state.n,
        rate,
    )
    return Trajectory(pd.DataFrame(rows), state.measure(), rate)
