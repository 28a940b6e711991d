# main.py
#!/usr/bin/env python3
"""
Money Multiplier Toolkit - Main Entry Point
Solves the banking search model and writes plot-ready CSV tables and reports
"""

import functools
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from dotenv import load_dotenv

from money_multiplier.pipeline.pipeline_runner import (
    DEFAULT_BOUNDS,
    DEFAULT_TARGETS,
    calibration_report,
    run_calibration,
    run_regressions,
    run_simulation,
    run_solve,
    run_sweep,
    run_thresholds,
    run_welfare,
)
from money_multiplier.pipeline.save_results import save_report, save_to_csv
from money_multiplier.src.config import Config, load_config
from money_multiplier.src.models import CalibrationTarget, ParameterBound
from money_multiplier.src.utils import parse_override, setup_logging

# Load environment variables
load_dotenv()

logger = logging.getLogger("money_multiplier")

USER_ERROR = 1
INTERNAL_ERROR = 2


class ToolkitGroup(click.Group):
    """Command group whose usage errors exit with the input-error code"""

    def main(self, *args, **kwargs):
        kwargs.pop("standalone_mode", None)
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as e:
            e.show()
            sys.exit(USER_ERROR)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(USER_ERROR)
        sys.exit(rv if isinstance(rv, int) else 0)


def handle_errors(func: Callable) -> Callable:
    """Map input errors to exit 1 and internal inconsistencies to exit 2"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.exceptions.Abort):
            raise
        except RuntimeError as e:
            logger.debug("Internal failure", exc_info=True)
            click.echo(f"Internal error: {e}", err=True)
            sys.exit(INTERNAL_ERROR)
        except (ValueError, OSError) as e:
            logger.debug("Input failure", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(USER_ERROR)

    return wrapper


def common_options(func: Callable) -> Callable:
    """--config, --threads and --out shared by every command"""
    func = click.option("--out", type=click.Path(dir_okay=False), default=None,
                        help="Output file (default: standard output)")(func)
    func = click.option("--threads", type=click.IntRange(min=1), default=None,
                        help="Worker processes for independent solves")(func)
    func = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                        help="Flat KEY=value parameter file")(func)
    return func


def resolve_config(config_path: Optional[str], threads: Optional[int]) -> Config:
    config = load_config(config_path)
    if threads is not None:
        config = Config(**{**config.model_dump(), "threads": threads})
    return config


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"'{text}' is not a comma-separated list of numbers")


def parse_grid(text: str) -> List[float]:
    """`start:stop:num` (inclusive linspace) or a comma-separated list"""
    if ":" not in text:
        values = parse_float_list(text)
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise click.BadParameter(f"grid '{text}' is not of the form start:stop:num")
        try:
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise click.BadParameter(f"grid '{text}' is not of the form start:stop:num")
        if num < 1:
            raise click.BadParameter(f"grid '{text}' needs at least one point")
        values = np.linspace(start, stop, num).tolist()
    if not values:
        raise click.BadParameter(f"grid '{text}' is empty")
    return values


def _grid_callback(ctx, param, value):
    return parse_grid(value)


def _list_callback(ctx, param, value):
    values = parse_float_list(value)
    if not values:
        raise click.BadParameter(f"'{value}' is empty")
    return values


def parse_pairs(values: Sequence[str]) -> List[Tuple[float, float]]:
    pairs = []
    for text in values:
        numbers = parse_float_list(text)
        if len(numbers) != 2:
            raise click.BadParameter(f"pair '{text}' is not of the form chi,i_r")
        pairs.append((numbers[0], numbers[1]))
    return pairs


def parse_overrides(values: Sequence[str]) -> Dict[str, object]:
    """`key=value` with a constant or a comma-separated per-period series"""
    overrides: Dict[str, object] = {}
    for text in values:
        key, raw = parse_override(text)
        numbers = parse_float_list(raw)
        if not numbers:
            raise click.BadParameter(f"override '{text}' has no value")
        overrides[key] = numbers[0] if len(numbers) == 1 else numbers
    return overrides


def parse_bounds(values: Sequence[str]) -> Tuple[ParameterBound, ...]:
    """`name=lower:upper`"""
    bounds = []
    for text in values:
        name, raw = parse_override(text)
        parts = raw.split(":")
        if len(parts) != 2:
            raise click.BadParameter(f"bound '{text}' is not of the form name=lower:upper")
        try:
            lower, upper = float(parts[0]), float(parts[1])
        except ValueError:
            raise click.BadParameter(f"bound '{text}' has a non-numeric limit")
        bounds.append(ParameterBound(name=name, lower=lower, upper=upper))
    return tuple(bounds)


def parse_targets(values: Sequence[str]) -> Tuple[CalibrationTarget, ...]:
    """`name=value` or `name=value:weight`"""
    targets = []
    for text in values:
        name, raw = parse_override(text)
        parts = raw.split(":")
        try:
            numbers = [float(part) for part in parts]
        except ValueError:
            raise click.BadParameter(f"target '{text}' has a non-numeric value")
        if len(numbers) == 1:
            targets.append(CalibrationTarget(name=name, value=numbers[0]))
        elif len(numbers) == 2:
            targets.append(CalibrationTarget(name=name, value=numbers[0], weight=numbers[1]))
        else:
            raise click.BadParameter(f"target '{text}' is not of the form name=value[:weight]")
    return tuple(targets)


@click.group(cls=ToolkitGroup)
@click.option("--verbose", is_flag=True, help="Log solver internals at DEBUG level")
def cli(verbose: bool):
    """Money multiplier toolkit: equilibria, sweeps, calibration and series."""
    setup_logging("DEBUG" if verbose else None)


@cli.command()
@click.option("--i", "i", type=float, required=True, help="Nominal interest rate")
@click.option("--ir", "i_r", type=float, default=0.0, show_default=True, help="Interest on reserves")
@click.option("--chi", type=float, default=0.1, show_default=True, help="Reserve requirement")
@click.option("--delta-bar", "delta_bar", type=float, default=0.0, show_default=True,
              help="Unsecured credit limit")
@common_options
@handle_errors
def solve(i, i_r, chi, delta_bar, config_path, threads, out):
    """Solve one policy point."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_solve(config, [(i, i_r, chi, delta_bar)]), out)


@cli.command()
@click.option("--ir", "i_r", type=float, multiple=True, default=(0.0,), show_default=True,
              help="Interest on reserves (repeatable)")
@click.option("--chi", type=float, default=0.1, show_default=True, help="Reserve requirement")
@common_options
@handle_errors
def thresholds(i_r, chi, config_path, threads, out):
    """Regime thresholds in i for each reserve rate."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_thresholds(config, list(i_r), chi), out)


@cli.command()
@click.option("--i-grid", "i_grid", default="0:0.16:17", show_default=True, callback=_grid_callback,
              help="start:stop:num or comma list")
@click.option("--ir", "i_r", type=float, multiple=True, default=(0.0,), show_default=True,
              help="Interest on reserves (repeatable)")
@click.option("--delta-bar", "delta_bar", default="0", show_default=True, callback=_list_callback,
              help="Comma list of credit limits")
@click.option("--chi", type=float, default=0.1, show_default=True, help="Reserve requirement")
@common_options
@handle_errors
def sweep(i_grid, i_r, delta_bar, chi, config_path, threads, out):
    """Reserves, money and currency demand over a policy grid."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_sweep(config, i_grid, list(i_r), delta_bar, chi), out)


@cli.command()
@click.option("--i-grid", "i_grid", default="0:0.16:17", show_default=True, callback=_grid_callback,
              help="start:stop:num or comma list")
@click.option("--pair", "pair", multiple=True, default=("0.1,0",), show_default=True,
              help="chi,i_r curve (repeatable)")
@click.option("--delta-bar", "delta_bar", type=float, default=0.0, show_default=True,
              help="Unsecured credit limit")
@common_options
@handle_errors
def welfare(i_grid, pair, delta_bar, config_path, threads, out):
    """Welfare per agent and in total along (chi, i_r) curves."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_welfare(config, i_grid, parse_pairs(pair), delta_bar), out)


@cli.command()
@click.option("--scenario", type=click.Path(dir_okay=False), required=True, help="Scenario CSV")
@click.option("--free", multiple=True, help="name=lower:upper (repeatable; default: all seven)")
@click.option("--target", multiple=True, help="name=value[:weight] (repeatable; default: pre-2008 model moments)")
@click.option("--starts", type=click.IntRange(min=1), default=None, help="Number of optimizer starts")
@click.option("--seed", type=int, default=None, help="Seed for the start draws")
@common_options
@handle_errors
def calibrate(scenario, free, target, starts, seed, config_path, threads, out):
    """Fit free parameters to target moments over a scenario."""
    config = resolve_config(config_path, threads)
    changes = {}
    if starts is not None:
        changes["calibration_starts"] = starts
    if seed is not None:
        changes["calibration_seed"] = seed
    if changes:
        config = Config(**{**config.model_dump(), **changes})
    bounds = parse_bounds(free) if free else DEFAULT_BOUNDS
    targets = parse_targets(target) if target else DEFAULT_TARGETS
    spec, result = run_calibration(config, scenario, bounds, targets)
    save_report(calibration_report(spec, result), out)


@cli.command()
@click.option("--scenario", type=click.Path(dir_okay=False), required=True, help="Scenario CSV")
@common_options
@handle_errors
def simulate(scenario, config_path, threads, out):
    """Model-implied series with the credit limit backed out per period."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_simulation(config, scenario), out)


@cli.command()
@click.option("--scenario", type=click.Path(dir_okay=False), required=True, help="Scenario CSV")
@click.option("--override", multiple=True, required=True,
              help="key=value or key=v1,v2,... per period; keys chi, i_r, i, delta_bar")
@common_options
@handle_errors
def counterfactual(scenario, override, config_path, threads, out):
    """Series with some policy inputs replaced."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_simulation(config, scenario, parse_overrides(override)), out)


@cli.command()
@click.option("--scenario", type=click.Path(dir_okay=False), required=True, help="Scenario CSV")
@click.option("--pre-end", "pre_end", default=None, help="Last period of the reserve regression")
@click.option("--post-start", "post_start", default=None, help="First period of the multiplier regressions")
@click.option("--lag", type=click.IntRange(min=0), default=1, show_default=True, help="Newey-West lag")
@click.option("--break", "break_periods", multiple=True, help="Known break period (repeatable)")
@common_options
@handle_errors
def regress(scenario, pre_end, post_start, lag, break_periods, config_path, threads, out):
    """Regressions and Chow test on model-implied series."""
    config = resolve_config(config_path, threads)
    save_to_csv(run_regressions(config, scenario, pre_end, post_start, lag, break_periods), out)


if __name__ == "__main__":
    cli()
