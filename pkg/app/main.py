import json
import sys
from pathlib import Path

import click
from colorama import Fore, Style, just_fix_windows_console
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import QQMError
from app.core.logger import logger
from app.services.runner import EXIT_ERROR, run as run_scenario
from app.services.scenario import bundled_scenario_path, list_scenarios, parse_scenario
from app.services.suite import format_summary, verify_suite


def _fail(message: str) -> None:
    logger.error(message)
    click.echo(f"{Fore.RED}Error: {message}{Style.RESET_ALL}", err=True)
    sys.exit(EXIT_ERROR)


@click.group()
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
def cli():
    """Quaternionic wave equation simulator and identity checker."""
    just_fix_windows_console()


@cli.command()
@click.option("--config", "-c", "config_path", required=True, type=click.Path(path_type=Path), help="Scenario file (JSON)")
@click.option("--out", "-o", "out_dir", default=None, type=click.Path(path_type=Path), help="Output directory")
@click.option("--tol-scale", default=1.0, show_default=True, type=float, help="Multiply every tolerance")
def run(config_path: Path, out_dir: Path, tol_scale: float):
    """Run one scenario and write its CSV/JSON artifacts."""
    try:
        scenario = parse_scenario(config_path)
        result = run_scenario(scenario, out_dir or settings.OUTPUT_DIR, tol_scale)
    except (QQMError, OSError, ValueError, ValidationError) as e:
        _fail(str(e))

    for report in result.reports:
        color = Fore.GREEN if report.passed else Fore.RED
        click.echo(
            f"{color}{'PASS' if report.passed else 'FAIL'}{Style.RESET_ALL} "
            f"{report.identity:<22} max={report.max_residual:.3e} tol={report.tolerance:.1e}"
        )
    for path in result.artifacts:
        click.echo(f"wrote {path}")
    sys.exit(result.exit_code)


@cli.command()
@click.option("--out", "-o", "out_dir", default=None, type=click.Path(path_type=Path), help="Output directory")
@click.option("--tol-scale", default=1.0, show_default=True, type=float, help="Multiply every tolerance")
@click.option("--scenario-dir", default=None, type=click.Path(path_type=Path), help="Scenario directory (default: bundled)")
@click.option("--workers", default=None, type=int, help="Concurrent scenarios")
@click.option("--skip-convergence", is_flag=True, help="Skip the refinement studies")
def verify(out_dir: Path, tol_scale: float, scenario_dir: Path, workers: int, skip_convergence: bool):
    """Run every bundled scenario and the convergence studies."""
    try:
        suite = verify_suite(
            out_dir=out_dir,
            tol_scale=tol_scale,
            scenario_dir=scenario_dir,
            max_workers=workers,
            convergence=not skip_convergence,
        )
    except (QQMError, OSError, ValueError) as e:
        _fail(str(e))

    click.echo(format_summary(suite))
    for row in suite.rows:
        if row.result is not None and not row.result.passed:
            click.echo(f"{Fore.RED}{row.scenario}: failed {', '.join(row.result.failures)}{Style.RESET_ALL}")
    sys.exit(suite.exit_code)


@cli.command("dump-scenario")
@click.argument("name")
def dump_scenario(name: str):
    """Print a bundled scenario."""
    try:
        click.echo(bundled_scenario_path(name).read_text(encoding="utf-8"), nl=False)
    except (QQMError, OSError) as e:
        _fail(str(e))


@cli.command("list-scenarios")
def list_scenarios_command():
    """List bundled scenarios."""
    try:
        paths = list_scenarios()
    except OSError as e:
        _fail(str(e))
    for path in paths:
        description = json.loads(path.read_text(encoding="utf-8")).get("description", "")
        click.echo(f"{Fore.CYAN}{path.stem:<28}{Style.RESET_ALL} {description}")


if __name__ == "__main__":
    cli()
