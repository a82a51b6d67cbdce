"""Configured verifier runs.

A run configuration is a flat INI file with the sections ``[run]``,
``[measure]``, ``[potential]``, ``[numerics]``, ``[checks]`` and
``[output]``; ``config/schema.ini`` documents every key. :func:`run_suite`
executes the configured checks and emits one JSON line per checked case.
"""
import configparser
import hashlib
import json
import logging
import re
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from kone.calculus.cylinder import LinearOuter
from kone.calculus.forms import energy_form_check, ibp_check
from kone.dynamics.checks import (
    SLOPE_RANGE,
    generator_consistency,
    reversibility_check,
    stationarity_check,
)
from kone.errors import ConfigError, KoneError
from kone.measure.core import MarkedConfiguration, Window
from kone.measure.cutoffs import CutoffFamily, check_constraints
from kone.measure.metric import metric_d, metric_dk
from kone.parameters import DEFAULT_SUITE_PARAMETERS, N_CHAINS, RHAT_MAX
from kone.sampling.crm import (
    laplace_functional,
    laplace_mc,
    mecke_check,
    sample_crm,
    sigma_integral,
)
from kone.sampling.gibbs import (
    nz_check,
    rejection_sample_gibbs,
    sample_gibbs_chains,
)
from kone.sampling.intensity import (
    ExponentialDensity,
    StepFunction,
    WeightDensity,
    gamma_density,
)
from kone.sampling.potentials import (
    AttractiveRing,
    PairPotential,
    SmoothstepRepulsion,
    ZeroPotential,
    check_c2,
)
from kone.types import CheckReport, RunConfig, SuiteResult
from kone.utils.io_utils import to_jsonable, write_jsonl
from kone.utils.parallel import map_replicas
from kone.utils.rng import derive_seed
from kone.verify.battery import (
    BATTERIES,
    Campbell,
    cylinder_pairs,
    default_observables,
    mecke_battery,
    nz_battery,
)
from kone.verify.stats import tv_distance

logger = logging.getLogger(__name__)

__all__ = [
    "CHECKS",
    "build_density",
    "build_potential",
    "config_hash",
    "dump_config",
    "load_config",
    "parse_config",
    "run_suite",
]

CHECKS = (
    "laplace",
    "mecke",
    "nz",
    "ibp",
    "energy_dual",
    "stationarity",
    "reversibility",
    "generator",
    "c2",
    "metric",
    "oracle",
)

# checks that integrate the diffusion
DYNAMIC_CHECKS = ("stationarity", "reversibility", "generator")

# acceptance thresholds that are not a number of standard errors
LAPLACE_RTOL = 0.01
CAMPBELL_RTOL = 0.01
ORACLE_TV = 0.05
METRIC_ATOL = 1e-12
METRIC_TRIPLES = 1000

# mean atom count of the micro window used by the rejection oracle
ORACLE_MEAN_COUNT = 0.6
ORACLE_S_MIN = 0.1


class Field(NamedTuple):
    section: str
    key: str
    parse: Callable[[str], Any]
    check: Optional[Callable[[Any], bool]] = None
    allowed: str = ""


def _checks(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _window(text: str) -> str:
    return Window.from_string(text).to_string()


SCHEMA: Dict[str, Field] = {
    "seed": Field(
        "run", "seed", int, lambda v: 0 <= v < 2**64, "0 <= seed < 2^64"
    ),
    "measure": Field(
        "measure",
        "family",
        str,
        lambda v: v in ("gamma", "exp"),
        "gamma or exp",
    ),
    "alpha": Field("measure", "alpha", float, lambda v: v > 0, "> 0"),
    "beta": Field("measure", "beta", float, lambda v: v > 0, "> 0"),
    "window": Field("measure", "window", _window),
    "s_min": Field("measure", "s_min", float, lambda v: 0 < v < 1, "(0, 1)"),
    "potential": Field(
        "potential",
        "family",
        str,
        lambda v: v in ("repulsive", "ring", "zero"),
        "repulsive, ring or zero",
    ),
    "potential_height": Field(
        "potential", "height", float, lambda v: v > 0, "> 0"
    ),
    "potential_depth": Field(
        "potential", "depth", float, lambda v: v >= 0, ">= 0"
    ),
    "potential_range": Field(
        "potential", "range", float, lambda v: v > 0, "> 0"
    ),
    "potential_delta": Field(
        "potential", "delta", float, lambda v: v > 0, "> 0"
    ),
    "n": Field("numerics", "n", int, lambda v: v >= 2, ">= 2"),
    "burnin": Field("numerics", "burnin", int, lambda v: v >= 0, ">= 0"),
    "thin": Field("numerics", "thin", int, lambda v: v >= 1, ">= 1"),
    "n_inner": Field("numerics", "n_inner", int, lambda v: v >= 1, ">= 1"),
    "dt": Field("numerics", "dt", float, lambda v: 0 < v <= 0.1, "(0, 0.1]"),
    "T": Field("numerics", "T", float, lambda v: v >= 0, ">= 0"),
    "s_max": Field("numerics", "s_max", float, lambda v: v > 1, "> 1"),
    "n_replicas": Field(
        "numerics", "n_replicas", int, lambda v: v >= 2, ">= 2"
    ),
    "checks": Field(
        "checks",
        "run",
        _checks,
        lambda v: all(name in CHECKS for name in v),
        ", ".join(CHECKS),
    ),
    "battery": Field(
        "checks",
        "battery",
        str,
        lambda v: v in BATTERIES,
        ", ".join(BATTERIES),
    ),
    "n_se": Field("checks", "n_se", float, lambda v: v > 0, "> 0"),
    "output": Field("output", "report", str),
}

SECTIONS = ("run", "measure", "potential", "numerics", "checks", "output")


def _locate(text: str, section: str, key: Optional[str] = None):
    """Line number of ``key`` in ``section`` (or of the section header)."""
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = re.match(r"^\s*\[([^\]]+)\]", line)
        if header:
            current = header.group(1).strip()
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section:
            if re.match(rf"^\s*{re.escape(key)}\s*[=:]", line):
                return number
    return None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse and validate the text of a run configuration.

    Raises
    ------
    ConfigError
        On syntax errors (with the line number), unknown sections or keys,
        a missing seed, and values outside their documented range (with
        ``section.key`` and the allowed range).
    """
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    parser.optionxform = str  # type: ignore[assignment]
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as err:
        raise ConfigError(
            f"expected a [section] header before {err.line.strip()!r}",
            line=err.lineno,
        ) from err
    except configparser.ParsingError as err:
        line, content = err.errors[0]
        raise ConfigError(
            f"could not parse {content.strip()!r}", line=line
        ) from err
    except (
        configparser.DuplicateOptionError,
        configparser.DuplicateSectionError,
    ) as err:
        raise ConfigError(err.message, line=err.lineno) from err

    known = {(f.section, f.key): name for name, f in SCHEMA.items()}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(
                f"unknown section [{section}]; expected one of "
                f"{', '.join(SECTIONS)}",
                line=_locate(text, section),
            )
        for key in parser[section]:
            if (section, key) not in known:
                raise ConfigError(
                    "unknown key",
                    field=f"{section}.{key}",
                    line=_locate(text, section, key),
                )

    config: Dict[str, Any] = dict(DEFAULT_SUITE_PARAMETERS)
    for name, field in SCHEMA.items():
        location = f"{field.section}.{field.key}"
        if not parser.has_option(field.section, field.key):
            if name == "seed":
                raise ConfigError("a seed is required", field=location)
            continue
        raw = parser.get(field.section, field.key)
        line = _locate(text, field.section, field.key)
        try:
            value = field.parse(raw)
        except (ValueError, KoneError) as err:
            raise ConfigError(
                f"invalid value {raw!r}: {err}", field=location, line=line
            ) from err
        if field.check is not None and not field.check(value):
            raise ConfigError(
                f"value {raw!r} out of range, expected {field.allowed}",
                field=location,
                line=line,
            )
        config[name] = value

    _validate(config)
    return config  # type: ignore[return-value]


def _validate(config: Dict[str, Any]):
    if config["s_max"] <= config["s_min"]:
        raise ConfigError(
            "s_max must exceed s_min", field="numerics.s_max"
        )
    dim = Window.from_string(config["window"]).dim
    dynamic = [c for c in config["checks"] if c in DYNAMIC_CHECKS]
    if dynamic and dim < 2:
        raise ConfigError(
            f"checks {', '.join(dynamic)} need a window of dimension >= 2",
            field="measure.window",
        )
    if "oracle" in config["checks"] and config["potential"] == "ring":
        raise ConfigError(
            "the rejection oracle needs a nonnegative potential",
            field="potential.family",
        )


def load_config(path: str) -> RunConfig:
    """Read and validate a configuration file."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    return parse_config(text, source=path)


def dump_config(config: RunConfig) -> str:
    """INI text that parses back to ``config``."""
    lines = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for name, field in SCHEMA.items():
            if field.section != section:
                continue
            value = config[name]  # type: ignore[literal-required]
            if name == "checks":
                value = ", ".join(value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{field.key} = {value}")
        lines.append("")
    return "\n".join(lines)


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    canonical = json.dumps(
        to_jsonable(config), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_density(config: RunConfig) -> WeightDensity:
    if config["measure"] == "gamma":
        return gamma_density()
    return ExponentialDensity(config["alpha"], config["beta"])


def build_potential(config: RunConfig) -> PairPotential:
    family = config["potential"]
    range_ = config["potential_range"]
    delta = config["potential_delta"]
    if family == "repulsive":
        return SmoothstepRepulsion(
            config["potential_height"], range_, delta
        )
    if family == "ring":
        return AttractiveRing(
            config["potential_height"],
            config["potential_depth"],
            range_,
            delta,
        )
    return ZeroPotential(range_, delta)


class _Suite:
    """Shared inputs and lazily drawn samples of one run."""

    def __init__(self, config: RunConfig, n_jobs: Optional[int] = None):
        self.config = config
        self.seed = int(config["seed"])
        self.n_jobs = n_jobs
        self.window = Window.from_string(config["window"])
        self.density = build_density(config)
        self.potential = build_potential(config)
        self.n_se = float(config["n_se"])
        self._crm: Optional[list] = None
        self._gibbs: Optional[list] = None
        self.gibbs_rhat: Dict[str, float] = {}

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng(derive_seed(self.seed, name))

    @property
    def crm_params(self):
        return {"s_min": self.config["s_min"], "window": self.window}

    @property
    def mcmc_params(self):
        return {
            "s_min": self.config["s_min"],
            "burnin": self.config["burnin"],
            "thin": self.config["thin"],
            "n_samples": max(2, -(-self.config["n"] // N_CHAINS)),
        }

    @property
    def diffusion_params(self):
        return {
            "dt": self.config["dt"],
            "T": self.config["T"],
            "s_min": self.config["s_min"],
            "s_max": self.config["s_max"],
        }

    @property
    def interacting(self) -> bool:
        return not self.potential.is_zero

    def crm_samples(self) -> list:
        if self._crm is None:
            density, params = self.density, self.crm_params
            self._crm = map_replicas(
                lambda rng, _: sample_crm(density, params, rng),
                derive_seed(self.seed, "crm"),
                self.config["n"],
                self.n_jobs,
            )
        return self._crm

    def gibbs_samples(self) -> list:
        if self._gibbs is None:
            chains = sample_gibbs_chains(
                self.window,
                None,
                self.potential,
                self.density,
                self.mcmc_params,
                self.rng("gibbs"),
                n_jobs=self.n_jobs,
            )
            self._gibbs = chains.samples
            self.gibbs_rhat = chains.diagnostics["rhat"]
        return self._gibbs

    def equilibrium_samples(self) -> Tuple[str, list]:
        """Gibbs samples, or reference samples when there is no
        interaction."""
        if self.interacting:
            return "gibbs", self.gibbs_samples()
        return "crm", self.crm_samples()

    def sample_sets(self) -> List[Tuple[str, list]]:
        sets = [("crm", self.crm_samples())]
        if self.interacting:
            sets.append(("gibbs", self.gibbs_samples()))
        return sets


def _case(
    lhs: float,
    rhs: float,
    se: float,
    tolerance: float,
    passed: bool,
    **details,
) -> Dict[str, Any]:
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "se": float(se),
        "tolerance": float(tolerance),
        "pass": bool(passed),
        "details": details,
    }


def _identity_case(report, n_se: float, **details) -> Dict[str, Any]:
    tolerance = n_se * report["se"]
    return _case(
        report["lhs"],
        report["rhs"],
        report["se"],
        tolerance,
        report["pass"],
        se_lhs=report["se_lhs"],
        se_rhs=report["se_rhs"],
        **details,
    )


def _check_laplace(suite: _Suite) -> List[Dict[str, Any]]:
    f = StepFunction.constant(1.0, suite.window)
    estimate = laplace_mc(
        suite.density,
        f,
        suite.crm_params,
        suite.config["n"],
        suite.rng("laplace"),
    )
    exact = laplace_functional(suite.density, f, suite.window)
    truncated = laplace_functional(
        suite.density, f, suite.window, suite.config["s_min"]
    )
    tolerance = max(suite.n_se * estimate["se"], LAPLACE_RTOL * exact)
    return [
        _case(
            estimate["estimate"],
            exact,
            estimate["se"],
            tolerance,
            abs(estimate["estimate"] - exact) <= tolerance,
            truncated=truncated,
        )
    ]


def _check_mecke(suite: _Suite) -> List[Dict[str, Any]]:
    rng = suite.rng("mecke")
    cases = []
    for F in mecke_battery(suite.window):
        report = mecke_check(
            suite.density,
            F,
            suite.crm_params,
            suite.config["n"],
            rng,
            n_inner=suite.config["n_inner"],
            n_se=suite.n_se,
        )
        case = _identity_case(report, suite.n_se, functional=F.name)
        if isinstance(F, Campbell):
            quadrature = sigma_integral(suite.density, F.f, F.support)
            margin = max(
                CAMPBELL_RTOL * abs(quadrature),
                suite.n_se * report["se_lhs"],
            )
            close = abs(report["lhs"] - quadrature) <= margin
            case["details"]["quadrature"] = quadrature
            case["pass"] = bool(case["pass"] and close)
        cases.append(case)
    return cases


def _check_nz(suite: _Suite) -> List[Dict[str, Any]]:
    samples = suite.gibbs_samples()
    rng = suite.rng("nz")
    cases = []
    for F in nz_battery(suite.window, suite.potential.range):
        report = nz_check(
            samples,
            suite.density,
            suite.potential,
            F,
            suite.config["s_min"],
            rng,
            n_inner=suite.config["n_inner"],
            n_se=suite.n_se,
        )
        cases.append(
            _identity_case(
                report, suite.n_se, functional=F.name, rhat=suite.gibbs_rhat
            )
        )
    return cases


def _check_ibp(suite: _Suite) -> List[Dict[str, Any]]:
    pairs = cylinder_pairs(suite.window, suite.config["battery"])
    cases = []
    for measure, samples in suite.sample_sets():
        potential = suite.potential if measure == "gibbs" else None
        for F, G in pairs:
            report = ibp_check(
                F,
                G,
                samples,
                suite.density,
                potential,
                s_min=suite.config["s_min"],
                n_se=suite.n_se,
            )
            cases.append(
                _case(
                    report["E_form"],
                    -report["pairing"],
                    report["se"],
                    suite.n_se * report["se"],
                    report["pass"],
                    measure=measure,
                    pair=f"{F.name},{G.name}",
                    residual=report["residual"],
                )
            )
    return cases


def _check_energy_dual(suite: _Suite) -> List[Dict[str, Any]]:
    pairs = cylinder_pairs(suite.window, suite.config["battery"])
    rng = suite.rng("energy_dual")
    cases = []
    for measure, samples in suite.sample_sets():
        potential = suite.potential if measure == "gibbs" else None
        for F, G in pairs:
            report = energy_form_check(
                F,
                G,
                samples,
                suite.density,
                suite.config["s_min"],
                potential,
                rng,
                n_inner=suite.config["n_inner"],
                n_se=suite.n_se,
            )
            cases.append(
                _identity_case(
                    report,
                    suite.n_se,
                    measure=measure,
                    pair=f"{F.name},{G.name}",
                )
            )
    return cases


def _check_stationarity(suite: _Suite) -> List[Dict[str, Any]]:
    measure, samples = suite.equilibrium_samples()
    potential = suite.potential if suite.interacting else None
    reports = stationarity_check(
        samples,
        suite.density,
        potential,
        default_observables(suite.window, potential),
        suite.diffusion_params,
        seed=derive_seed(suite.seed, "stationarity"),
        n_se=suite.n_se,
        n_jobs=suite.n_jobs,
    )
    return [
        _case(
            r["mean_0"],
            r["mean_T"],
            r["se"],
            suite.n_se * r["se"] + r["bias_budget"],
            r["pass"],
            measure=measure,
            observable=r["observable"],
            ks_statistic=r["ks_statistic"],
            ks_pvalue=r["ks_pvalue"],
            bias_budget=r["bias_budget"],
            reflection_rate=r["reflection_rate"],
        )
        for r in reports
    ]


def _check_reversibility(suite: _Suite) -> List[Dict[str, Any]]:
    measure, samples = suite.equilibrium_samples()
    potential = suite.potential if suite.interacting else None
    pairs = cylinder_pairs(suite.window, suite.config["battery"])[:3]
    cases = []
    for index, (F, G) in enumerate(pairs):
        report = reversibility_check(
            F,
            G,
            samples,
            suite.density,
            potential,
            suite.diffusion_params,
            seed=derive_seed(suite.seed, f"reversibility-{index}"),
            n_se=suite.n_se,
            n_jobs=suite.n_jobs,
        )
        cases.append(
            _case(
                report["fg"],
                report["gf"],
                report["se"],
                suite.n_se * report["se"] + report["bias_budget"],
                report["pass"],
                measure=measure,
                pair=f"{F.name},{G.name}",
                bias_budget=report["bias_budget"],
            )
        )
    return cases


def _check_generator(suite: _Suite) -> List[Dict[str, Any]]:
    F = cylinder_pairs(suite.window, "linear")[0][0]
    measure, samples = suite.equilibrium_samples()
    support = F.supports[0]
    box = Window(support.lo, support.hi)
    eta = max(samples, key=lambda e: int(np.sum(box.contains(e.positions))))
    method = "quadrature" if isinstance(F.outer, LinearOuter) else "mc"
    report = generator_consistency(
        F,
        eta,
        suite.density,
        suite.potential if suite.interacting else None,
        n_replicas=suite.config["n_replicas"],
        seed=derive_seed(suite.seed, "generator"),
        method=method,
        params=suite.diffusion_params,
    )
    low, high = SLOPE_RANGE
    return [
        _case(
            report["slope"],
            1.0,
            0.0,
            0.5 * (high - low),
            report["pass"],
            measure=measure,
            method=method,
            generator=report["generator"],
            dts=report["dts"],
            errors=report["errors"],
        )
    ]


def _check_c2(suite: _Suite) -> List[Dict[str, Any]]:
    report = check_c2(suite.potential, suite.window.dim)
    return [
        _case(
            report["margin"],
            0.0,
            0.0,
            0.0,
            report["pass"],
            epsilon=report["epsilon"],
            inf_phi=report["inf_phi"],
            neg_norm=report["neg_norm"],
        )
    ]


def _random_configuration(rng: np.random.Generator, dim: int):
    n = int(rng.integers(0, 6))
    positions = rng.uniform(-3.0, 3.0, size=(n, dim))
    weights = rng.exponential(1.0, size=n) + 1e-3
    return MarkedConfiguration(weights, positions)


def _check_metric(suite: _Suite) -> List[Dict[str, Any]]:
    dim = suite.window.dim
    cutoffs = CutoffFamily()
    constraints = check_constraints(cutoffs, dim)
    single = MarkedConfiguration([1.0], np.zeros((1, dim)))
    empty = MarkedConfiguration(np.zeros(0), np.zeros((0, dim)))
    d_1 = metric_dk(single, empty, 1, cutoffs)

    rng = suite.rng("metric")
    violations = 0
    for _ in range(METRIC_TRIPLES):
        a, b, c = (_random_configuration(rng, dim) for _ in range(3))
        for k in (1, 2, 3):
            if metric_dk(a, c, k, cutoffs) > (
                metric_dk(a, b, k, cutoffs)
                + metric_dk(b, c, k, cutoffs)
                + METRIC_ATOL
            ):
                violations += 1
        if metric_d(a, c, cutoffs) > (
            metric_d(a, b, cutoffs) + metric_d(b, c, cutoffs) + METRIC_ATOL
        ):
            violations += 1

    passed = (
        constraints["pass"]
        and abs(d_1 - 2.0) <= METRIC_ATOL
        and violations == 0
    )
    return [
        _case(
            d_1,
            2.0,
            0.0,
            METRIC_ATOL,
            passed,
            constraints=constraints,
            triangle_violations=violations,
            triples=METRIC_TRIPLES,
        )
    ]


def _check_oracle(suite: _Suite) -> List[Dict[str, Any]]:
    dim = suite.window.dim
    s_floor = max(suite.config["s_min"], ORACLE_S_MIN)
    unit = suite.density.sigma_mass(Window.cube(dim), s_floor)
    side = (ORACLE_MEAN_COUNT / unit) ** (1.0 / dim)
    window = Window.cube(dim, 0.0, side)
    n = suite.config["n"]
    chains = sample_gibbs_chains(
        window,
        None,
        suite.potential,
        suite.density,
        {**suite.mcmc_params, "s_min": s_floor},
        suite.rng("oracle-chain"),
        n_jobs=suite.n_jobs,
    )
    exact = rejection_sample_gibbs(
        window,
        suite.potential,
        suite.density,
        s_floor,
        n,
        suite.rng("oracle-exact"),
    )
    counts = [len(eta) for eta in exact]
    tv = tv_distance(chains.diagnostics["count_trace"], counts)
    rhat = chains.diagnostics["rhat"]
    mixed = max(rhat.values()) < RHAT_MAX
    return [
        _case(
            tv,
            0.0,
            0.0,
            ORACLE_TV,
            tv < ORACLE_TV and mixed,
            window=window.to_string(),
            max_count=int(max(counts)),
            rhat=rhat,
        )
    ]


CHECK_FUNCTIONS = {
    "laplace": _check_laplace,
    "mecke": _check_mecke,
    "nz": _check_nz,
    "ibp": _check_ibp,
    "energy_dual": _check_energy_dual,
    "stationarity": _check_stationarity,
    "reversibility": _check_reversibility,
    "generator": _check_generator,
    "c2": _check_c2,
    "metric": _check_metric,
    "oracle": _check_oracle,
}


def run_suite(
    config: RunConfig,
    output: Optional[str] = None,
    n_jobs: Optional[int] = None,
) -> SuiteResult:
    """Run the configured checks.

    Parameters
    ----------
    config : RunConfig
        Validated configuration, see :func:`load_config`.
    output : str, optional
        Path of the JSON-lines report; defaults to ``config["output"]``.
        Nothing is written when both are empty.
    n_jobs : int, optional
        Worker count; defaults to ``KONE_NUM_THREADS``.

    Returns
    -------
    SuiteResult
        Exit status (0 iff every case passed) and the report lines. Each
        line embeds the check name, the seed, the configuration and its
        hash.
    """
    suite = _Suite(config, n_jobs)
    digest = config_hash(config)
    reports: List[CheckReport] = []
    for check in config["checks"]:
        logger.info("running check %s", check)
        for case in CHECK_FUNCTIONS[check](suite):
            report = {
                "check": check,
                "seed": suite.seed,
                "config_hash": digest,
                "config": dict(config),
                **case,
            }
            reports.append(report)  # type: ignore[arg-type]
            logger.info(
                "%s: lhs=%.6g rhs=%.6g se=%.3g pass=%s",
                check,
                case["lhs"],
                case["rhs"],
                case["se"],
                case["pass"],
            )

    path = output if output is not None else config["output"]
    if path:
        write_jsonl(reports, path)
    status = 0 if all(r["pass"] for r in reports) else 1
    return SuiteResult(status, reports)
