"""kone command line interface."""
import functools
import json
import logging
import sys

import click

from kone import __version__, api
from kone.errors import KoneError
from kone.measure.cutoffs import CutoffFamily
from kone.parameters import (
    BURNIN,
    DT,
    N_CHAINS,
    N_SE,
    NUM_THREADS_ENV,
    RECORD_EVERY,
    S_MAX,
    S_MIN,
    T_HORIZON,
    THIN,
)
from kone.utils.io_utils import (
    read_measures,
    save_series,
    to_jsonable,
    write_jsonl,
    write_measures,
)
from kone.verify.battery import cylinder_pairs, mecke_battery, nz_battery
from kone.verify.suite import load_config

INFO_STR = f"""
kone {__version__} - random discrete measures, their diffusion and checks
    Stochastic commands need --seed; worker count from {NUM_THREADS_ENV}.
    Windows are written lo..hi per axis, e.g. 0..4,0..4,periodic.
"""

DEFAULT_POTENTIAL = "repulsive:height=5,range=1,delta=0.25"


def handle_errors(func):
    """Report library errors in red and exit with status 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (KoneError, ValueError, RuntimeError) as err:
            click.secho(f"Error: {err}", fg="red", err=True)
            sys.exit(1)

    return wrapper


def measure_options(func):
    """Options selecting the reference measure and the window."""
    options = [
        click.option(
            "--family",
            type=click.Choice(["gamma", "exp"]),
            default="gamma",
            help="Weight density family (default gamma).",
        ),
        click.option("--alpha", type=float, default=1.0, help="Scale."),
        click.option("--beta", type=float, default=1.0, help="Intensity."),
        click.option(
            "--window",
            type=str,
            default="0..1,0..1",
            help="Window, lo..hi per axis.",
        ),
        click.option(
            "--s-min",
            type=float,
            default=S_MIN,
            help=f"Weight truncation (default {S_MIN}).",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def chain_options(func):
    """Options of the Gibbs sampler."""
    options = [
        click.option(
            "--potential",
            type=str,
            default=DEFAULT_POTENTIAL,
            help="Potential spec family:key=value,...",
        ),
        click.option(
            "--burnin",
            type=int,
            default=BURNIN,
            help=f"Discarded initial steps (default {BURNIN}).",
        ),
        click.option(
            "--thin",
            type=int,
            default=THIN,
            help=f"Steps between recorded samples (default {THIN}).",
        ),
        click.option(
            "--chains",
            type=click.IntRange(min=1),
            default=N_CHAINS,
            help="Independent chains started empty and dense; 1 runs a "
            f"single chain (default {N_CHAINS}).",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def diffusion_options(func):
    options = [
        click.option(
            "--T",
            "T",
            type=float,
            default=T_HORIZON,
            help=f"Time horizon (default {T_HORIZON}).",
        ),
        click.option(
            "--dt",
            type=float,
            default=DT,
            help=f"Time step (default {DT}).",
        ),
        click.option(
            "--s-max",
            type=float,
            default=S_MAX,
            help=f"Upper weight barrier (default {S_MAX}).",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


seed_option = click.option(
    "--seed",
    type=int,
    required=True,
    help="Seed of the random streams.",
)

n_option = click.option(
    "--n",
    type=int,
    default=1000,
    help="Number of samples (default 1000).",
)

n_se_option = click.option(
    "--n-se",
    type=float,
    default=N_SE,
    help=f"Accepted number of standard errors (default {N_SE}).",
)


def _density(args):
    return api.get_density(args["family"], args["alpha"], args["beta"])


def _run_chains(args, seed: int, boundary=None):
    """Run the Gibbs sampler; ``args["n"]`` samples are split evenly
    between the chains."""
    n_chains = args["chains"]
    params = {
        "s_min": args["s_min"],
        "burnin": args["burnin"],
        "thin": args["thin"],
        "n_samples": args["n"],
    }
    if n_chains == 1:
        return api.sample_gibbs(
            args["window"],
            args["potential"],
            _density(args),
            boundary=boundary,
            params=params,
            seed=seed,
        )
    params["n_samples"] = max(2, -(-args["n"] // n_chains))
    return api.sample_gibbs_chains(
        args["window"],
        args["potential"],
        _density(args),
        boundary=boundary,
        params=params,
        seed=seed,
        n_chains=n_chains,
    )


def _gibbs_samples(args, seed: int):
    return _run_chains(args, seed).samples


def _samples(measure: str, args, seed: int):
    if measure == "gibbs":
        return _gibbs_samples(args, seed)
    return api.sample_crm(
        _density(args), args["window"], args["s_min"], args["n"], seed
    )


def _diffusion_params(args):
    return {
        "T": args["T"],
        "dt": args["dt"],
        "s_min": args["s_min"],
        "s_max": args["s_max"],
    }


def _emit(records, report: str, quiet: bool) -> bool:
    """Write report lines and summarise them; returns whether all
    passed."""
    if report == "-":
        write_jsonl(records, click.get_text_stream("stdout"))
    else:
        write_jsonl(records, report)
    passed = all(r["pass"] for r in records)
    if not quiet:
        failed = sum(not r["pass"] for r in records)
        click.echo(f"{len(records) - failed}/{len(records)} checks passed")
        if report != "-":
            click.echo(f"Report saved to: {report}")
    if not passed:
        click.secho("Some checks failed.", fg="red", err=True)
    return passed


@click.group()
@click.option(
    "--quiet",
    is_flag=True,
    default=False,
    help="Minimize output printing.",
)
@click.pass_context
def cli(ctx, quiet: bool):
    """kone - random discrete measures, their diffusion and checks."""
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if not quiet:
        click.echo(INFO_STR)


@cli.command("sample-crm")
@click.argument("output", type=click.Path())
@measure_options
@n_option
@seed_option
@click.pass_context
@handle_errors
def sample_crm(ctx, output: str, seed: int, **args):
    """Sample the truncated random measure and save it to OUTPUT.

    OUTPUT is a text file with one block per sample, or - for stdout.
    """
    samples = _samples("crm", args, seed)
    write_measures(
        samples,
        click.get_text_stream("stdout") if output == "-" else output,
    )
    if not ctx.obj["quiet"] and output != "-":
        counts = [len(eta) for eta in samples]
        click.echo(f"Sampled {len(samples)} measures, {sum(counts)} atoms")
        click.echo(f"Samples saved to: {output}")


@cli.command("sample-gibbs")
@click.argument("output", type=click.Path())
@measure_options
@chain_options
@n_option
@click.option(
    "--boundary",
    type=str,
    default="none",
    help="Measure file with the boundary condition, or none.",
)
@seed_option
@click.pass_context
@handle_errors
def sample_gibbs(ctx, output: str, seed: int, boundary: str, **args):
    """Sample the finite-volume Gibbs measure and save it to OUTPUT."""
    boundary_measure = None
    if boundary != "none":
        boundary_measure = read_measures(boundary)[0]
    chain = _run_chains(args, seed, boundary_measure)
    write_measures(
        chain.samples,
        click.get_text_stream("stdout") if output == "-" else output,
    )
    if not ctx.obj["quiet"] and output != "-":
        rates = chain.diagnostics["acceptance"]
        click.echo(
            "Acceptance rates: "
            + ", ".join(f"{k} {v:.3f}" for k, v in rates.items())
        )
        click.echo(f"Energy ESS: {chain.diagnostics['ess']:.1f}")
        if "rhat" in chain.diagnostics:
            rhat = chain.diagnostics["rhat"]
            click.echo(
                f"R-hat: energy {rhat['energy']:.3f}, "
                f"count {rhat['count']:.3f}"
            )
        click.echo(f"Samples saved to: {output}")


@cli.command()
@click.argument("output", type=click.Path())
@click.option(
    "--init",
    type=str,
    default="gibbs",
    help="Measure file with the initial state, or gibbs.",
)
@measure_options
@chain_options
@diffusion_options
@click.option(
    "--observables",
    type=str,
    default="count,mass,inner",
    help="Comma separated observables: count, mass, inner, energy.",
)
@click.option(
    "--record-every",
    type=int,
    default=RECORD_EVERY,
    help=f"Steps between recorded values (default {RECORD_EVERY}).",
)
@click.option(
    "--final",
    type=click.Path(),
    default=None,
    help="Also save the final state to this file.",
)
@seed_option
@click.pass_context
@handle_errors
def simulate(
    ctx,
    output: str,
    init: str,
    observables: str,
    record_every: int,
    final,
    seed: int,
    **args,
):
    """Integrate the atom diffusion and save the time series to OUTPUT.

    OUTPUT is a CSV file with a t column and one column per observable.
    """
    if init == "gibbs":
        initial = _gibbs_samples({**args, "n": 1}, seed)[0]
    else:
        initial = read_measures(init)[0]
    trajectory = api.simulate(
        initial,
        args["potential"],
        _density(args),
        observables,
        {**_diffusion_params(args), "record_every": record_every},
        seed=seed + 1,
    )
    save_series(trajectory.series, output)
    if final is not None:
        write_measures(trajectory.final, final)
    if not ctx.obj["quiet"]:
        click.echo(f"Reflection rate: {trajectory.reflection_rate:.4f}")
        click.echo(f"Time series saved to: {output}")


@cli.command("verify-mecke")
@click.argument("report", type=click.Path())
@measure_options
@n_option
@click.option("--n-inner", type=int, default=1, help="Inner draws.")
@n_se_option
@seed_option
@click.pass_context
@handle_errors
def verify_mecke(ctx, report: str, seed: int, **args):
    """Check the Mecke identity and write the report to REPORT."""
    window = api.get_window(args["window"])
    results = api.verify_mecke(
        _density(args),
        window,
        args["s_min"],
        args["n"],
        seed,
        args["n_inner"],
        args["n_se"],
    )
    records = [
        {"check": "mecke", "functional": F.name, "seed": seed, **r}
        for F, r in zip(mecke_battery(window), results)
    ]
    if not _emit(records, report, ctx.obj["quiet"]):
        sys.exit(1)


@cli.command("verify-nz")
@click.argument("report", type=click.Path())
@measure_options
@chain_options
@n_option
@click.option("--n-inner", type=int, default=1, help="Inner draws.")
@n_se_option
@seed_option
@click.pass_context
@handle_errors
def verify_nz(ctx, report: str, seed: int, **args):
    """Check the Nguyen-Zessin identity on Gibbs samples."""
    samples = _gibbs_samples(args, seed)
    potential = api.get_potential(args["potential"])
    results = api.verify_nz(
        samples,
        potential,
        _density(args),
        args["s_min"],
        seed + 1,
        n_inner=args["n_inner"],
        n_se=args["n_se"],
    )
    battery = nz_battery(samples[0].window, potential.range)
    records = [
        {"check": "nz", "functional": F.name, "seed": seed, **r}
        for F, r in zip(battery, results)
    ]
    if not _emit(records, report, ctx.obj["quiet"]):
        sys.exit(1)


@cli.command("verify-ibp")
@click.argument("report", type=click.Path())
@click.option(
    "--measure",
    type=click.Choice(["crm", "gibbs"]),
    default="crm",
    help="Reference samples or Gibbs samples.",
)
@click.option(
    "--battery",
    type=click.Choice(["default", "linear"]),
    default="default",
    help="Battery of cylinder function pairs.",
)
@measure_options
@chain_options
@n_option
@n_se_option
@seed_option
@click.pass_context
@handle_errors
def verify_ibp(ctx, report: str, measure: str, battery: str, seed, **args):
    """Check the integration by parts formula for each (F, G) pair."""
    samples = _samples(measure, args, seed)
    potential = args["potential"] if measure == "gibbs" else None
    results = api.verify_ibp(
        samples,
        potential,
        _density(args),
        battery,
        args["s_min"],
        n_se=args["n_se"],
    )
    pairs = cylinder_pairs(samples[0].window, battery)
    records = [
        {
            "check": "ibp",
            "measure": measure,
            "pair": f"{F.name},{G.name}",
            "seed": seed,
            **r,
        }
        for (F, G), r in zip(pairs, results)
    ]
    if not _emit(records, report, ctx.obj["quiet"]):
        sys.exit(1)


@cli.command("verify-stationarity")
@click.argument("report", type=click.Path())
@click.option(
    "--measure",
    type=click.Choice(["crm", "gibbs"]),
    default="gibbs",
    help="Equilibrium samples to start from.",
)
@measure_options
@chain_options
@diffusion_options
@n_option
@n_se_option
@seed_option
@click.pass_context
@handle_errors
def verify_stationarity(ctx, report: str, measure: str, seed, **args):
    """Check that equilibrium samples stay in equilibrium up to time T."""
    samples = _samples(measure, args, seed)
    potential = args["potential"] if measure == "gibbs" else None
    results = api.verify_stationarity(
        samples,
        potential,
        _density(args),
        _diffusion_params(args),
        seed=seed + 1,
        n_se=args["n_se"],
    )
    records = [
        {"check": "stationarity", "seed": seed, **r} for r in results
    ]
    if not _emit(records, report, ctx.obj["quiet"]):
        sys.exit(1)


@cli.command("verify-reversibility")
@click.argument("report", type=click.Path())
@click.option(
    "--measure",
    type=click.Choice(["crm", "gibbs"]),
    default="gibbs",
    help="Equilibrium samples to start from.",
)
@click.option(
    "--battery",
    type=click.Choice(["default", "linear"]),
    default="default",
    help="Battery of cylinder function pairs.",
)
@measure_options
@chain_options
@diffusion_options
@n_option
@n_se_option
@seed_option
@click.pass_context
@handle_errors
def verify_reversibility(
    ctx, report: str, measure: str, battery: str, seed, **args
):
    """Check the time symmetry E[F(0) G(T)] = E[G(0) F(T)]."""
    samples = _samples(measure, args, seed)
    potential = args["potential"] if measure == "gibbs" else None
    results = api.verify_reversibility(
        samples,
        potential,
        _density(args),
        _diffusion_params(args),
        battery,
        seed=seed + 1,
        n_se=args["n_se"],
    )
    pairs = cylinder_pairs(samples[0].window, battery)
    records = [
        {
            "check": "reversibility",
            "pair": f"{F.name},{G.name}",
            "seed": seed,
            **r,
        }
        for (F, G), r in zip(pairs, results)
    ]
    if not _emit(records, report, ctx.obj["quiet"]):
        sys.exit(1)


@cli.command("metric-distance")
@click.argument("first", type=click.Path(exists=True))
@click.argument("second", type=click.Path(exists=True))
@click.option("--q", type=float, default=0.5, help="Band ratio q.")
@handle_errors
def metric_distance(first: str, second: str, q: float):
    """Print the metric distance between the measures in FIRST and SECOND.

    The first block of each file is used.
    """
    eta = read_measures(first)[0]
    eta_prime = read_measures(second)[0]
    distance = api.metric_distance(eta, eta_prime, CutoffFamily(q=q))
    click.echo(repr(distance))


@cli.command("check-c2")
@click.option(
    "--potential",
    type=str,
    default=DEFAULT_POTENTIAL,
    help="Potential spec family:key=value,...",
)
@click.option("--dim", type=int, default=2, help="Dimension.")
@handle_errors
def check_c2(potential: str, dim: int):
    """Print the stability constant and margin of a pair potential."""
    result = api.check_c2(api.get_potential(potential), dim)
    click.echo(json.dumps(to_jsonable(result), sort_keys=True))
    if not result["pass"]:
        click.secho("The potential fails condition (C2).", fg="red", err=True)
        sys.exit(1)


@cli.command("run-suite")
@click.argument("config_file", type=click.Path(exists=True))
@click.option(
    "--output",
    type=click.Path(),
    default=None,
    help="Report path; overrides the [output] section.",
)
@click.pass_context
@handle_errors
def run_suite(ctx, config_file: str, output):
    """Run the checks configured in CONFIG_FILE."""
    config = load_config(config_file)
    if not ctx.obj["quiet"]:
        click.echo(f"Checks: {', '.join(config['checks']) or 'none'}")
        click.echo(f"Seed: {config['seed']}")
    status, reports = api.run_suite(config, output=output)
    path = output if output is not None else config["output"]
    if not ctx.obj["quiet"]:
        failed = sum(not r["pass"] for r in reports)
        click.echo(f"{len(reports) - failed}/{len(reports)} checks passed")
        if path:
            click.echo(f"Report saved to: {path}")
    if status:
        for r in reports:
            if not r["pass"]:
                click.secho(f"Failed: {r['check']}", fg="red", err=True)
    sys.exit(status)


if __name__ == "__main__":
    cli()
