# toricgw.py
"""Command-line entry point: genus-0 Gromov-Witten invariants of toric varieties by localization"""

import logging
import os
import sys
import warnings

import click

# Add current directory to path for imports
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from engine.tools import ToricTools
from localization.equivariant import EdgeOrientation
from utils.display import format_moment_graph, format_nef, format_results
from utils.env_utils import get_engine_config, load_env
from utils.errors import DimensionMismatchWarning, ToricGWError

load_env()

job_option = click.option("--job", "job_path", required=True, type=click.Path(dir_okay=False),
                          help="Job file (JSON, '#' comment lines allowed)")


def _fail(error: ToricGWError) -> None:
    click.echo(f"ERROR {error.code}: {error}", err=True)
    sys.exit(1)


@click.group()
@click.option("--log-level", default=None,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              help="Overrides TORICGW_LOG_LEVEL")
@click.pass_context
def cli(ctx: click.Context, log_level):
    """Compute genus-0 Gromov-Witten invariants of smooth projective toric varieties."""
    try:
        config = get_engine_config()
    except ValueError as e:
        raise click.UsageError(str(e))
    logging.basicConfig(level=(log_level or config.log_level).upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    ctx.obj = ToricTools(config)


@cli.command()
@job_option
@click.option("--seed", type=int, default=None, help="Weight seed (default: job, then TORICGW_SEED)")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--verify/--no-verify", default=None, help="Integrate with two seeds and compare")
@click.option("--progress/--no-progress", default=None, help="Show a progress bar")
@click.option("--orientation", type=click.Choice(["lower", "higher"]), default="lower",
              help="Which endpoint of an edge plays the first cone")
@click.option("-v", "--verbose", is_flag=True, help="Print graph counts and timings")
@click.pass_obj
def integrate(tools: ToricTools, job_path, seed, workers, verify, progress, orientation, verbose):
    """Integrate the job's integrand(s); prints one RESULT line each."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DimensionMismatchWarning)
            results = tools.run_job(job_path, seed=seed, workers=workers, verify=verify,
                                    orientation=EdgeOrientation(orientation), progress=progress)
        for warning in caught:
            click.echo(f"WARNING {warning.category.__name__}: {warning.message}", err=True)
        click.echo(format_results(results, verbose))
    except ToricGWError as e:
        _fail(e)


@cli.command("moment-graph")
@job_option
@click.pass_obj
def moment_graph_command(tools: ToricTools, job_path):
    """Print rays, maximal cones and the wall curve classes mg[i,j]."""
    try:
        click.echo(format_moment_graph(tools.get_moment_graph(job_path)))
    except ToricGWError as e:
        _fail(e)


@cli.command()
@job_option
@click.pass_obj
def nef(tools: ToricTools, job_path):
    """Print nef cone generators and their pairings with the Mori generators."""
    try:
        click.echo(format_nef(tools.get_nef(job_path)))
    except ToricGWError as e:
        _fail(e)


@cli.command()
@job_option
@click.option("--count", is_flag=True, help="Only print the number of decorated graphs")
@click.pass_obj
def graphs(tools: ToricTools, job_path, count):
    """List the decorated graphs of (X, beta, m), or count them."""
    try:
        if count:
            click.echo(tools.count_graphs(job_path))
        else:
            for line in tools.list_graphs(job_path):
                click.echo(line)
    except ToricGWError as e:
        _fail(e)


if __name__ == "__main__":
    cli()
