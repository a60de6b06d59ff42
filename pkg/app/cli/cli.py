"""
# ffincidence command group

    ffincidence verify   --theorem vinh --q 2,3 --gen random_points:n=20 --seeds 0..99
    ffincidence apps     --app dot_pairs --q 3 --variant as_written
    ffincidence spectrum --q 2 --d1 2 --d2 2
    ffincidence oracle   --q 2,3,4,5 [--inject-fault u,v]

Exit codes: 0 success, 1 hard-check failure, 2 configuration error.
"""

import json

import click

from app.engine.engine import DEFAULT_ORACLE_FIELDS, ExperimentConfig, IncidenceEngine, parse_q_list
from app.engine.errors import IncidenceError
from config import Config

EXIT_CONFIG = 2


def _fail_config(error: Exception):
    click.echo(f"error: {error}", err=True)
    raise SystemExit(EXIT_CONFIG)


def _load_config(path, overrides: dict, defaults: dict = None) -> ExperimentConfig:
    """File values first, then every flag the user actually passed; unset flags arrive as None or False."""
    base = ExperimentConfig.from_dict(defaults) if defaults else None
    if path:
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise click.BadParameter(f"cannot read config {path}: {e}", param_hint="--config")
        base = ExperimentConfig.from_dict(data, base)
    return ExperimentConfig.from_dict({k: v for k, v in overrides.items() if v is not None and v is not False}, base)


def _experiment_options(func):
    options = [
        click.option("--q", "q_list", default=None, help="Comma-separated field orders, e.g. 2,3,5."),
        click.option("--d1", type=int, default=None),
        click.option("--d2", type=int, default=None),
        click.option("--gen", default=None, help="Point-side generator, kind:key=value,..."),
        click.option("--gen-lines", "gen_lines", default=None, help="Flat-side generator."),
        click.option("--seeds", default=None, help="Inclusive seed range a..b (default: FFINCIDENCE_SEED)."),
        click.option("--lambda", "lambda_mode", type=click.Choice(["paper", "computed"]), default=None),
        click.option("--variant", type=click.Choice(["as_written", "corrected"]), default=None),
        click.option("--threshold-exponent", "threshold_exponent", type=float, default=None),
        click.option("--a", type=int, default=None, help="First dot-product target."),
        click.option("--b", type=int, default=None, help="Second dot-product target."),
        click.option("--t", type=int, default=None, help="Target of the 4-dimensional count."),
        click.option("--out", "output", type=click.Choice(["csv", "json"]), default=None),
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None),
        click.option("--workers", type=int, default=None),
        click.option("--dump-sets", "dump_sets", type=click.Path(file_okay=False), default=None),
        click.option("--timings", is_flag=True, default=False, help="Fill the elapsed_ms column."),
        click.option("--store", is_flag=True, default=False, help="Persist the run to the database."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run(engine: IncidenceEngine, command: str, config_path, overrides: dict):
    try:
        config = _load_config(config_path, {"command": command, **overrides})
        result = engine.run(config)
    except IncidenceError as e:
        _fail_config(e)
    click.echo(result.render(), nl=False)
    for failure in result.failures[:1]:
        click.echo("hard check failed: " + json.dumps(failure, default=str), err=True)
    raise SystemExit(result.exit_code)


@click.group(name="ffincidence")
@click.option("--verbose", is_flag=True, default=False, help="Timestamped progress on stderr.")
@click.pass_context
def cli(ctx, verbose):
    """Exact incidence counts and bound checks over finite fields."""
    ctx.obj = IncidenceEngine(verbose=verbose or Config.VERBOSE)


@cli.command()
@click.option("--theorem", "theorem_id", default=None,
              help="cs1, cs2, vinh, hyperplane, cartesian or sdz.")
@_experiment_options
@click.pass_obj
def verify(engine, config_path, **overrides):
    """Run a bound verifier over a q x seed grid."""
    _run(engine, "verify", config_path, overrides)


@cli.command()
@click.option("--app", "app_id", default=None,
              help="dot_pairs, dot_single, dot_4d, sum_product or vector_valued.")
@_experiment_options
@click.pass_obj
def apps(engine, config_path, **overrides):
    """Run an application experiment over a q x seed grid."""
    _run(engine, "apps", config_path, overrides)


@cli.command()
@click.option("--q", "q_list", default="2", help="Comma-separated field orders.")
@click.option("--d1", type=int, default=2)
@click.option("--d2", type=int, default=2)
@click.option("--tol", type=float, default=None, help="Eigensolver tolerance.")
@click.pass_obj
def spectrum(engine, q_list, d1, d2, tol):
    """Print n, k, the second eigenvalue and its bound as JSON."""
    try:
        reports = [engine.spectrum(q, d1, d2, tol) for q in parse_q_list(q_list)]
    except IncidenceError as e:
        _fail_config(e)
    payload = reports[0] if len(reports) == 1 else reports
    click.echo(json.dumps(payload, indent=2))


@cli.command()
@click.option("--q", "q_list", default=None, help="Comma-separated field orders (default 2,3,4,5).")
@click.option("--instances", "oracle_instances", type=int, default=None, help="Seeded instances per check (default: the full acceptance counts).")
@click.option("--inject-fault", "inject_fault", default=None, help="Toggle adjacency entry u,v before checking.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def oracle(engine, q_list, oracle_instances, inject_fault, config_path):
    """Run the acceptance oracle suite and print a pass/fail summary."""
    try:
        config = _load_config(config_path, {"command": "oracle", "q_list": q_list,
                                            "oracle_instances": oracle_instances, "inject_fault": inject_fault},
                              defaults={"q_list": DEFAULT_ORACLE_FIELDS})
        report = engine.oracle(config)
    except IncidenceError as e:
        _fail_config(e)
    click.echo(report.summary(), nl=False)
    if not report.ok:
        click.echo("counterexample: " + json.dumps(report.counterexample, default=str), err=True)
    raise SystemExit(report.exit_code)
