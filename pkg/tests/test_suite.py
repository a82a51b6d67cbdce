"""Test run configurations and the verifier suite."""
import os

import pytest

from kone.errors import ConfigError
from kone.parameters import DEFAULT_SUITE_PARAMETERS
from kone.sampling.intensity import ExponentialDensity
from kone.sampling.potentials import (
    AttractiveRing,
    SmoothstepRepulsion,
    ZeroPotential,
)
from kone.utils.io_utils import read_jsonl
from kone.verify.suite import (
    build_density,
    build_potential,
    config_hash,
    dump_config,
    load_config,
    parse_config,
    run_suite,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "config")


def test_seed_only_config_takes_defaults():
    """Test that omitted keys take their defaults."""
    config = parse_config("[run]\nseed = 7\n")
    assert config["seed"] == 7
    for key, value in DEFAULT_SUITE_PARAMETERS.items():
        assert config[key] == value


@pytest.mark.parametrize("name", ["schema.ini", "fast.ini", "acceptance.ini"])
def test_shipped_configs_parse(name):
    """Test the configuration files in config/."""
    config = load_config(os.path.join(CONFIG_DIR, name))
    assert isinstance(config["seed"], int)


def test_acceptance_config_lists_every_check():
    """Test the continuation lines of the check list."""
    config = load_config(os.path.join(CONFIG_DIR, "acceptance.ini"))
    assert config["checks"][0] == "laplace"
    assert config["checks"][-1] == "oracle"
    assert len(config["checks"]) == 11


def test_missing_seed():
    """Test that the seed is mandatory."""
    with pytest.raises(ConfigError) as err:
        parse_config("[measure]\nfamily = gamma\n")
    assert err.value.field == "run.seed"
    assert "a seed is required" in str(err.value)


def test_unknown_key_reports_its_line():
    """Test the location of an unknown key."""
    text = "[run]\nseed = 1\n\n[numerics]\ncolour = 3\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == "numerics.colour"
    assert err.value.line == 5
    assert "unknown key" in str(err.value)


def test_unknown_section():
    """Test that unknown sections are rejected."""
    with pytest.raises(ConfigError) as err:
        parse_config("[run]\nseed = 1\n[extras]\nx = 1\n")
    assert err.value.line == 3


@pytest.mark.parametrize(
    "text, field",
    [
        ("[run]\nseed = 1\n[measure]\ns_min = 2\n", "measure.s_min"),
        ("[run]\nseed = -1\n", "run.seed"),
        ("[run]\nseed = 1\n[numerics]\ndt = 0.5\n", "numerics.dt"),
        ("[run]\nseed = 1\n[checks]\nrun = mecke, colour\n", "checks.run"),
        ("[run]\nseed = 1\n[numerics]\nn = many\n", "numerics.n"),
    ],
)
def test_out_of_range_values(text, field):
    """Test that invalid values name their field and line."""
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field
    assert err.value.line is not None


def test_syntax_error_reports_line():
    """Test a key outside any section."""
    with pytest.raises(ConfigError) as err:
        parse_config("seed = 1\n")
    assert err.value.line == 1


def test_cross_field_validation():
    """Test constraints that involve several keys."""
    with pytest.raises(ConfigError) as err:
        parse_config(
            "[run]\nseed = 1\n[measure]\nwindow = 0..4\n"
            "[checks]\nrun = stationarity\n"
        )
    assert err.value.field == "measure.window"
    with pytest.raises(ConfigError) as err:
        parse_config(
            "[run]\nseed = 1\n[potential]\nfamily = ring\n"
            "[checks]\nrun = oracle\n"
        )
    assert err.value.field == "potential.family"


def test_keys_are_case_sensitive():
    """Test that the horizon key keeps its capital letter."""
    config = parse_config("[run]\nseed = 1\n[numerics]\nT = 0.5\n")
    assert config["T"] == 0.5
    with pytest.raises(ConfigError):
        parse_config("[run]\nseed = 1\n[numerics]\nt = 0.5\n")


def test_dump_config_parses_back():
    """Test that dumped configurations read back unchanged."""
    config = parse_config(
        "[run]\nseed = 3\n[measure]\nfamily = exp\nalpha = 0.3\n"
        "window = 0..2,0..2,periodic\n[checks]\nrun = mecke, c2\n"
    )
    assert parse_config(dump_config(config)) == config


def test_config_hash():
    """Test that the hash is deterministic and depends on the seed."""
    first = parse_config("[run]\nseed = 1\n")
    again = parse_config("[run]\nseed = 1\n")
    other = parse_config("[run]\nseed = 2\n")
    assert config_hash(first) == config_hash(again)
    assert config_hash(first) != config_hash(other)
    assert len(config_hash(first)) == 64


def test_builders():
    """Test building the density and the potential from a config."""
    config = parse_config(
        "[run]\nseed = 1\n[measure]\nfamily = exp\nalpha = 2\nbeta = 3\n"
        "[potential]\nfamily = ring\ndepth = 0.5\n"
    )
    assert isinstance(build_density(config), ExponentialDensity)
    assert isinstance(build_potential(config), AttractiveRing)
    config["potential"] = "zero"
    assert isinstance(build_potential(config), ZeroPotential)
    config["potential"] = "repulsive"
    assert isinstance(build_potential(config), SmoothstepRepulsion)


def test_empty_check_list_succeeds():
    """Test that running nothing succeeds without writing."""
    config = parse_config("[run]\nseed = 1\n")
    result = run_suite(config)
    assert result.status == 0
    assert result.reports == []


def test_static_checks_pass(tmp_path):
    """Test the Laplace, stability and metric checks end to end."""
    config = parse_config(
        "[run]\nseed = 11\n[measure]\nwindow = 0..1,0..1\n"
        "[numerics]\nn = 400\n[checks]\nrun = laplace, c2, metric\n"
    )
    path = str(tmp_path / "reports.jsonl")
    result = run_suite(config, output=path)
    assert result.status == 0, result.reports
    records = read_jsonl(path)
    assert [r["check"] for r in records] == ["laplace", "c2", "metric"]
    for record in records:
        assert record["seed"] == 11
        assert record["config_hash"] == config_hash(config)
        assert record["pass"]


def test_unstable_potential_fails():
    """Test that a failing case gives a nonzero status."""
    config = parse_config(
        "[run]\nseed = 1\n[potential]\nfamily = ring\nheight = 1\n"
        "depth = 1\n[checks]\nrun = c2\n"
    )
    result = run_suite(config)
    assert result.status == 1
    assert not result.reports[0]["pass"]


def test_same_seed_gives_identical_reports(tmp_path):
    """Test that a seed fixes the report file, whatever the worker
    count."""
    config = parse_config(
        "[run]\nseed = 12\n[measure]\nwindow = 0..3,0..3\ns_min = 0.02\n"
        "[numerics]\nn = 40\nburnin = 200\nthin = 5\n"
        "[checks]\nrun = laplace, mecke, nz, c2, metric, oracle\n"
    )
    first = str(tmp_path / "first.jsonl")
    second = str(tmp_path / "second.jsonl")
    run_suite(config, output=first, n_jobs=1)
    run_suite(config, output=second, n_jobs=2)
    with open(first, "rb") as a, open(second, "rb") as b:
        content = a.read()
        assert content == b.read()
    records = read_jsonl(first)
    assert "rhat" in records[-1]["details"]
    nz = [r for r in records if r["check"] == "nz"]
    assert nz and all("rhat" in r["details"] for r in nz)
