"""
boxgas
Command-line entry point: entropy sweeps, occupation distributions, dephasing
movies and entropy-energy curves for a gas released from half a box.
"""

import logging
import sys
from typing import Dict, Optional

import click
from dotenv import load_dotenv

from checks import PASS, SKIP, check_directory
from config import OUTPUT_CONFIG
from errors import BoxGasError, ConfigurationError
from orchestration import FigureOrchestrator
from run_config import FIGURE_PRESETS, apply_run_settings, load_config_file

logger = logging.getLogger("boxgas")

EXIT_OK, EXIT_ALL_FAILED, EXIT_CONFIG = 0, 1, 2


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def print_welcome(subcommand: str, tag: str) -> None:
    preset = FIGURE_PRESETS[tag]
    click.echo("=" * 60)
    click.echo(f"🧪 boxgas {OUTPUT_CONFIG['version']} :: {subcommand} ({tag})")
    click.echo(f"   {preset['description']}")
    click.echo("=" * 60)


def report(result: Dict) -> None:
    for path in result["paths"]:
        click.echo(f"📄 {path}")
    for check in result["checks"]:
        color = "green" if check.status == PASS else "yellow" if check.status == SKIP else "red"
        click.secho(f"   {check.target}: {check.name} = {check.status} ({check.value})", fg=color)
    if result["failures"]:
        click.secho(f"⚠️  {result['failures']} of {result['points']} point(s) failed; see '#' diagnostics",
                    fg="yellow")


def execute(subcommand: str, flags: Dict, config_path: Optional[str], quiet: bool) -> int:
    """Build the RunConfig, run the orchestrator and map the outcome to an exit code."""
    try:
        file_settings = load_config_file(config_path) if config_path else {}
        run_config = apply_run_settings(subcommand, file_settings, flags)
    except ConfigurationError as e:
        click.secho(f"❌ Configuration error: {e}", fg="red", err=True)
        return EXIT_CONFIG

    if not quiet:
        print_welcome(subcommand, run_config.figure_tag)
    try:
        orchestrator = FigureOrchestrator(run_config, progress=not quiet and sys.stderr.isatty())
        result = orchestrator.run()
    except ConfigurationError as e:
        click.secho(f"❌ Configuration error: {e}", fg="red", err=True)
        return EXIT_CONFIG
    except BoxGasError as e:
        click.secho(f"❌ {subcommand} failed: {e}", fg="red", err=True)
        return EXIT_ALL_FAILED

    if not quiet:
        report(result)
    if result["all_failed"]:
        click.secho(f"❌ Every point of {subcommand} failed", fg="red", err=True)
        return EXIT_ALL_FAILED
    if not quiet:
        click.secho(f"✅ {subcommand} complete", fg="green", bold=True)
    return EXIT_OK


def run_options(function):
    """Flags shared by every computing subcommand."""
    options = [
        click.option("--L", "L", type=float, help="Trap size after expansion."),
        click.option("--M", "M", type=float, help="Particle mass."),
        click.option("--T", "T", type=float, help="Temperature (entropy-sweep)."),
        click.option("--n-max", "n_max", type=str, help="Basis size or 'auto'."),
        click.option("--gamma", type=float, help="Dephasing rate in alpha / hbar."),
        click.option("--model", type=click.Choice(["uniform", "wall"]), help="Dephasing rate profile."),
        click.option("--ratios", type=str, help="L / lambda_T values: 'a,b,c' or 'geom:start:stop:count'."),
        click.option("--temps", type=str, help="Temperatures: 'a,b,c' or 'geom:start:stop:count'."),
        click.option("--windows", type=str, help="Time windows 'start:end,start:end' in hbar / alpha."),
        click.option("--nx", type=int, help="Position points per profile."),
        click.option("--nt", type=int, help="Time points per window."),
        click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory."),
        click.option("--emit-plots/--no-emit-plots", "emit_plots", default=None, help="Write gnuplot scripts."),
        click.option("--workers", type=int, help="Worker processes for sweeps."),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Flat key = value file, or a boxgas CSV to rerun."),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _run_subcommand(ctx: click.Context, subcommand: str, config_path: Optional[str], flags: Dict) -> None:
    ctx.exit(execute(subcommand, flags, config_path, ctx.obj["quiet"]))


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.option("-q", "--quiet", is_flag=True, help="Only warnings and errors.")
@click.pass_context
def cli(ctx, verbose, quiet):
    """Quantum free expansion of a gas released from half a box."""
    load_dotenv()
    configure_logging(verbose, quiet)
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet


@cli.command("entropy-sweep")
@run_options
@click.pass_context
def entropy_sweep(ctx, config_path, **flags):
    """Entropy changes against L / lambda_T."""
    _run_subcommand(ctx, "entropy-sweep", config_path, flags)


@cli.command()
@run_options
@click.pass_context
def distribution(ctx, config_path, **flags):
    """Post-quench occupations of the full-trap levels."""
    _run_subcommand(ctx, "distribution", config_path, flags)


@cli.command()
@run_options
@click.pass_context
def dynamics(ctx, config_path, **flags):
    """Density-profile movie under dephasing, with steady and equilibrium profiles."""
    _run_subcommand(ctx, "dynamics", config_path, flags)


@cli.command("se-curve")
@run_options
@click.pass_context
def se_curve(ctx, config_path, **flags):
    """Entropy against energy for free expansion and equilibrium."""
    _run_subcommand(ctx, "se-curve", config_path, flags)


@cli.command()
@click.argument("tag", type=click.Choice(sorted(FIGURE_PRESETS) + ["all"]))
@click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--emit-plots/--no-emit-plots", "emit_plots", default=True, help="Write gnuplot scripts.")
@click.option("--workers", type=int, help="Worker processes for sweeps.")
@click.pass_context
def fig(ctx, tag, output_dir, emit_plots, workers):
    """Reproduce one figure, or all of them, with preset settings."""
    tags = sorted(FIGURE_PRESETS) if tag == "all" else [tag]
    flags = {"output_dir": output_dir, "emit_plots": emit_plots, "workers": workers}
    codes = [execute(FIGURE_PRESETS[t]["subcommand"], flags, None, ctx.obj["quiet"]) for t in tags]
    ctx.exit(max(codes))


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def check(directory):
    """Re-evaluate the embedded checks of every CSV in DIRECTORY."""
    ctx = click.get_current_context()
    ctx.exit(EXIT_OK if check_directory(directory) else EXIT_ALL_FAILED)


if __name__ == "__main__":
    cli()
