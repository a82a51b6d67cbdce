import os

from kone.types import DiffusionParams, McmcParams

# Weight truncation of the reference measure.
S_MIN = 1e-3
S_MAX = 50.0

# Cutoff family.
CUTOFF_Q = 0.5
SMOOTHSTEP_ORDER = 1
K_MAX = 8
N_HATS = 64

# Relative tolerance of every sigma-mass quadrature.
QUAD_EPSREL = 1e-9
QUAD_LIMIT = 200

# Metropolis-Hastings.
MOVE_PROBS = (0.25, 0.25, 0.25, 0.25)
JUMP_SCALE = 0.25
BURNIN = 2000
THIN = 10
N_SAMPLES = 1000
ENERGY_CHECK_EVERY = 1000
ENERGY_CHECK_RTOL = 1e-8
BRUTE_FORCE_BELOW = 32

# Independent chains; odd chains start this many times denser than the
# reference measure.
N_CHAINS = 4
DENSE_START = 4.0
RHAT_MAX = 1.1

# Euler-Maruyama.
DT = 1e-3
T_HORIZON = 0.1
RECORD_EVERY = 10
REFLECTION_FLAG_RATE = 0.01

# Statistical acceptance.
N_SE = 3.0
ALPHA_LEVEL = 0.01

NUM_THREADS_ENV = "KONE_NUM_THREADS"

DEFAULT_MOMENTS_PATH = os.path.join(
    os.path.expanduser("~"),
    ".cache",
    "kone",
    "box_moments.json",
)


DEFAULT_MCMC_PARAMETERS: McmcParams = {
    "s_min": S_MIN,
    "move_probs": MOVE_PROBS,
    "jump_scale": JUMP_SCALE,
    "burnin": BURNIN,
    "thin": THIN,
    "n_samples": N_SAMPLES,
    "check_every": ENERGY_CHECK_EVERY,
    "quiet": True,
}


DEFAULT_DIFFUSION_PARAMETERS: DiffusionParams = {
    "dt": DT,
    "T": T_HORIZON,
    "s_min": S_MIN,
    "s_max": S_MAX,
    "record_every": RECORD_EVERY,
}


# Every key of a suite configuration except the seed, which is mandatory.
DEFAULT_SUITE_PARAMETERS = {
    "checks": [],
    "battery": "default",
    "measure": "gamma",
    "alpha": 1.0,
    "beta": 1.0,
    "window": "0.0..4.0,0.0..4.0",
    "s_min": S_MIN,
    "potential": "repulsive",
    "potential_height": 5.0,
    "potential_depth": 0.0,
    "potential_range": 1.0,
    "potential_delta": 0.25,
    "n": N_SAMPLES,
    "burnin": BURNIN,
    "thin": THIN,
    "n_inner": 1,
    "dt": DT,
    "T": T_HORIZON,
    "s_max": S_MAX,
    "n_replicas": 2000,
    "n_se": N_SE,
    "output": "",
}


def get_num_threads() -> int:
    """Worker count read from ``KONE_NUM_THREADS`` (default 1)."""
    value = os.environ.get(NUM_THREADS_ENV, "1")
    try:
        num = int(value)
    except ValueError as err:
        raise ValueError(
            f"{NUM_THREADS_ENV} must be an integer, got {value!r}"
        ) from err
    return max(num, 1)
