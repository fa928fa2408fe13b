"""
Acceptance suite: every bundled scenario plus the two refinement studies.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from colorama import Fore, Style

from app.core.config import settings
from app.core.exceptions import QQMError
from app.core.logger import logger
from app.models.report import ConvergenceFit
from app.services.convergence import SPATIAL_ORDER, TEMPORAL_ORDER, continuity_study, rk4_study
from app.services.runner import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, RunResult, run
from app.services.scenario import list_scenarios, parse_scenario


@dataclass
class SuiteRow:
    scenario: str
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.result is not None and self.result.passed


@dataclass
class SuiteResult:
    rows: List[SuiteRow] = field(default_factory=list)
    fits: List[Tuple[str, ConvergenceFit, float, float]] = field(default_factory=list)
    fit_errors: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.fit_errors or any(row.error for row in self.rows):
            return EXIT_ERROR
        fits_ok = all(fit.within(expected, slack) for _, fit, expected, slack in self.fits)
        if fits_ok and all(row.passed for row in self.rows):
            return EXIT_PASS
        return EXIT_FAIL


def _run_one(path: Path, out_dir: Path, tol_scale: float) -> SuiteRow:
    try:
        scenario = parse_scenario(path)
        return SuiteRow(scenario=scenario.name, result=run(scenario, out_dir, tol_scale))
    except (QQMError, OSError, ValueError) as e:
        logger.error(f"{path.name}: {e}")
        return SuiteRow(scenario=path.stem, error=str(e))


def verify_suite(
    out_dir: Optional[Path] = None,
    tol_scale: float = 1.0,
    scenario_dir: Optional[Path] = None,
    max_workers: Optional[int] = None,
    convergence: bool = True,
) -> SuiteResult:
    """
    Run every scenario in scenario_dir concurrently, then the convergence studies

    Args:
        out_dir: Artifact directory, OUTPUT_DIR when None
        tol_scale: Factor applied to every tolerance
        scenario_dir: Directory of *.json scenarios, the bundled ones when None
        max_workers: Thread pool size, MAX_WORKERS when None
        convergence: Also fit the dx and dt convergence orders

    Returns:
        SuiteResult: Rows in directory order plus the fitted orders

    Raises:
        FileNotFoundError: scenario_dir does not exist
    """
    out_dir = Path(out_dir or settings.OUTPUT_DIR)
    paths = list_scenarios(scenario_dir)
    logger.info(f"Verifying {len(paths)} scenarios from {scenario_dir or settings.SCENARIO_DIR}")

    suite = SuiteResult()
    with ThreadPoolExecutor(max_workers=max_workers or settings.MAX_WORKERS) as executor:
        futures = [executor.submit(_run_one, path, out_dir, tol_scale) for path in paths]
        suite.rows = [future.result() for future in futures]

    if convergence:
        for label, study, (expected, slack) in (
            ("continuity order in dx", continuity_study, SPATIAL_ORDER),
            ("RK4 order in dt", rk4_study, TEMPORAL_ORDER),
        ):
            try:
                _, fit = study()
                suite.fits.append((label, fit, expected, slack))
            except QQMError as e:
                logger.error(f"{label}: {e}")
                suite.fit_errors.append(f"{label}: {e}")

    if suite.exit_code == EXIT_PASS:
        logger.success("All scenarios and convergence studies passed")
    return suite


def _mark(ok: bool) -> str:
    return f"{Fore.GREEN}PASS{Style.RESET_ALL}" if ok else f"{Fore.RED}FAIL{Style.RESET_ALL}"


def format_summary(suite: SuiteResult) -> str:
    header = f"{'scenario':<28} {'identity':<22} {'max residual':>13} {'tolerance':>10}  result"
    lines = [f"{Style.BRIGHT}{header}{Style.RESET_ALL}"]
    for row in suite.rows:
        if row.error is not None:
            blank = f"{'-':<22} {'-':>13} {'-':>10}"
            lines.append(f"{row.scenario:<28} {blank}  {Fore.RED}ERROR{Style.RESET_ALL} {row.error}")
            continue
        for report in row.result.reports:
            lines.append(
                f"{row.scenario:<28} {report.identity:<22} {report.max_residual:>13.3e} "
                f"{report.tolerance:>10.1e}  {_mark(report.passed)}"
            )
    for label, fit, expected, slack in suite.fits:
        lines.append(
            f"{label:<28} {'fitted order':<22} {fit.fitted_order:>13.3f} "
            f"{f'{expected:g}+-{slack:g}':>10}  {_mark(fit.within(expected, slack))}"
        )
    for error in suite.fit_errors:
        lines.append(f"{Fore.RED}ERROR{Style.RESET_ALL} {error}")
    return "\n".join(lines)
