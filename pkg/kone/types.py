"""Types used in the code base."""
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

try:
    from typing import TypedDict
except ImportError:
    from typing_extensions import TypedDict


try:
    from typing import Protocol
except ImportError:
    from typing_extensions import Protocol


try:
    from typing import NotRequired
except ImportError:
    from typing_extensions import NotRequired


__all__ = [
    "C2Report",
    "CheckReport",
    "CrmSampleParams",
    "DiffusionParams",
    "EstimateReport",
    "Functional",
    "GeneratorConsistencyReport",
    "GibbsDiagnostics",
    "GibbsSamples",
    "IbpReport",
    "IdentityReport",
    "McmcParams",
    "Observable",
    "ReversibilityReport",
    "RunConfig",
    "SpatialField",
    "StationarityReport",
    "SuiteResult",
    "Support",
    "TestFunction",
    "Trajectory",
]


class CrmSampleParams(TypedDict):
    """Parameters for sampling a truncated completely random measure."""

    s_min: float
    """Weight truncation. Atoms with weight below this are not sampled."""

    window: Any
    """Window (``kone.measure.core.Window``) the atoms are sampled in."""

    seed: NotRequired[Optional[int]]
    """Seed of the random stream. Only used when no generator is passed."""


class McmcParams(TypedDict):
    """Parameters of the Metropolis-Hastings birth-death-move sampler."""

    s_min: float
    """Weight truncation of the reference measure."""

    move_probs: Tuple[float, float, float, float]
    """Probabilities of (birth, death, weight-resample, position-move)."""

    jump_scale: float
    """Standard deviation of the Gaussian position move."""

    burnin: int
    """Number of discarded initial steps."""

    thin: int
    """Number of steps between two recorded samples."""

    n_samples: int
    """Number of recorded samples."""

    check_every: int
    """Steps between two checks of the cached energy."""

    quiet: bool
    """Whether to suppress the progress log."""


class DiffusionParams(TypedDict):
    """Parameters of the Euler-Maruyama integrator."""

    dt: float
    """Time step."""

    T: float
    """Time horizon."""

    s_min: float
    """Lower reflecting barrier for weights."""

    s_max: float
    """Upper reflecting barrier for weights."""

    record_every: int
    """Number of steps between two recorded observable values."""


C2Base = TypedDict("C2Base", {"pass": bool})


class C2Report(C2Base):
    """Result of checking condition (C2) for a pair potential."""

    epsilon: float
    """The constant 2 v_d d^{d/2} (R/delta + 1)."""

    margin: float
    """inf_{|x-y|<=delta} phi minus epsilon times the negative-part norm."""

    inf_phi: float
    """Grid infimum of phi over the delta-ball."""

    neg_norm: float
    """Sup-norm of the negative part of phi."""


class EstimateReport(TypedDict):
    """A Monte Carlo estimate with its standard error."""

    estimate: float
    se: float


PassBase = TypedDict("PassBase", {"pass": bool})


class IdentityReport(PassBase):
    """Two-sided Monte Carlo check of an integral identity."""

    lhs: float
    """Estimate of the left hand side."""

    rhs: float
    """Estimate of the right hand side."""

    se_lhs: float
    """Standard error of ``lhs``."""

    se_rhs: float
    """Standard error of ``rhs``."""

    se: float
    """Combined standard error of ``lhs - rhs``."""


class IbpReport(PassBase):
    """Integration by parts residual for a pair (F, G)."""

    E_form: float
    """Estimate of the energy form."""

    pairing: float
    """Estimate of (L F, G)."""

    residual: float
    """``E_form + pairing``; zero in expectation."""

    se: float
    """Standard error of ``residual``."""


class StationarityReport(PassBase):
    """Comparison of an observable at time 0 and at time T."""

    observable: str
    ks_statistic: float
    ks_pvalue: float
    mean_0: float
    mean_T: float
    se: float
    """Standard error of the mean difference."""

    bias_budget: float
    reflection_rate: float


class ReversibilityReport(PassBase):
    """Symmetry check of the transition semigroup for a pair (F, G)."""

    fg: float
    """Estimate of E[F(eta_0) G(eta_T)]."""

    gf: float
    """Estimate of E[G(eta_0) F(eta_T)]."""

    difference: float
    se: float
    bias_budget: float


class GeneratorConsistencyReport(PassBase):
    """Short-time consistency of the integrator with the generator."""

    generator: float
    """Value of the generator applied to F at the initial state."""

    dts: List[float]
    estimates: List[float]
    """Estimates of (E[F(eta_dt)] - F(eta_0)) / dt."""

    errors: List[float]
    ses: List[float]
    slope: float
    """Fitted slope of log error against log dt."""


CheckBase = TypedDict("CheckBase", {"pass": bool})


class CheckReport(CheckBase):
    """One line of a suite report bundle."""

    check: str
    lhs: float
    rhs: float
    se: float
    tolerance: float
    seed: int
    config_hash: str
    config: Dict[str, Any]
    details: NotRequired[Dict[str, Any]]


class RunConfig(TypedDict):
    """Configuration of a suite run."""

    seed: int
    """Root seed; every check derives its own stream from it."""

    checks: List[str]
    """Names of the checks to run, in order."""

    battery: str
    """Name of the functional / cylinder battery."""

    measure: str
    """Reference measure: ``gamma`` or ``exp``."""

    alpha: float
    beta: float

    window: str
    """Window in ``lo..hi,lo..hi[,periodic]`` form."""

    s_min: float
    """Weight truncation of the reference measure."""

    potential: str
    """Potential family: ``repulsive``, ``ring`` or ``zero``."""

    potential_height: float
    potential_depth: float
    potential_range: float
    potential_delta: float

    n: int
    """Number of samples per check."""

    burnin: int
    thin: int
    n_inner: int
    dt: float
    T: float
    s_max: float
    n_replicas: int
    """Replicas per time step of the generator consistency check."""

    n_se: float
    """Number of standard errors accepted by two-sided checks."""

    output: str
    """Path of the JSON-lines report; empty for no file."""


class SuiteResult(NamedTuple):
    """Outcome of a suite run."""

    status: int
    """0 when every check passed, 1 otherwise."""

    reports: List[CheckReport]


class GibbsDiagnostics(TypedDict):
    """Diagnostics attached to a Gibbs sampler run."""

    acceptance: Dict[str, float]
    """Acceptance rate per move type."""

    energy_trace: np.ndarray
    """Energy of each recorded sample."""

    count_trace: np.ndarray
    """Atom count of each recorded sample."""

    ess: float
    """Effective sample size of the energy trace."""

    rhat: NotRequired[Dict[str, float]]
    """Potential scale reduction factor of the energy and count traces
    across chains."""

    n_chains: NotRequired[int]


class GibbsSamples(NamedTuple):
    """Thinned output of the Gibbs sampler."""

    samples: list
    """Recorded discrete measures."""

    diagnostics: GibbsDiagnostics
    """Acceptance rates, energy trace and effective sample size."""


class Trajectory(NamedTuple):
    """Recorded output of one diffusion run."""

    series: Any
    """``pandas.DataFrame`` with a ``t`` column and one column per
    observable."""

    final: Any
    """Discrete measure at the end of the run."""

    reflection_rate: float
    """Fraction of weight updates that hit a reflecting barrier."""


class Support(NamedTuple):
    """Compact support of a functional in (s, x)."""

    s_lo: float
    s_hi: float
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]


class TestFunction(Protocol):
    """Smooth compactly supported function on R_+ x R^d.

    All methods are vectorised: ``s`` has shape (n,) and ``x`` has shape
    (n, d).
    """

    def __call__(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...

    def d_s(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...

    def d2_s(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...

    def grad_x(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...

    def lap_x(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        ...


class Functional(Protocol):
    """Function F(s, x, eta) used by the Mecke and NZ verifiers."""

    name: str
    support: Support

    def __call__(self, s: np.ndarray, x: np.ndarray, eta) -> np.ndarray:
        """Evaluate F at the points (s_i, x_i), all with the same eta."""
        ...


class Observable(Protocol):
    """Scalar function of a discrete measure recorded along trajectories."""

    name: str

    def __call__(self, eta) -> float:
        ...


class SpatialField(Protocol):
    """Positive function on R^d with its gradient."""

    def value(self, x: np.ndarray) -> np.ndarray:
        ...

    def grad(self, x: np.ndarray) -> np.ndarray:
        ...

    def bounds(self) -> Tuple[float, float]:
        """Lower and upper bound of the field on R^d."""
        ...
