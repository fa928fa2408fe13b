"""
Scenario pipeline: build, evolve, sample observables, run the selected
checks and write the artifacts.

Exit codes: 0 every check passed, 1 at least one check failed. Operational
errors propagate as exceptions and are mapped to 2 by the CLI.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from app.core.config import settings
from app.core.exceptions import NonHermitianError
from app.core.files import atomic_writer
from app.core.logger import logger
from app.models.report import ObservableSample, ResidualReport
from app.models.scenario import Scenario
from app.models.simulation import SimulationConfig
from app.services import theorems
from app.services.dynamics import Trajectory, evolve
from app.services.grid import QField, write_field_csv
from app.services.observables import sample_observables
from app.services.oracle import CField, compare, evolve_complex
from app.services.potential import PotentialSpec
from app.services.scenario import (
    build_config,
    build_grid,
    build_initial_state,
    build_operator,
    build_potential,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


@dataclass
class RunResult:
    name: str
    reports: List[ResidualReport] = field(default_factory=list)
    artifacts: List[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.passed else EXIT_FAIL

    @property
    def failures(self) -> List[str]:
        return [report.identity for report in self.reports if not report.passed]


@dataclass
class _Context:
    scenario: Scenario
    cfg: SimulationConfig
    pot: PotentialSpec
    psi0: QField
    traj: Trajectory

    def tol(self, identity: str):
        return self.scenario.tolerance_for(identity)

    @property
    def operator(self):
        return build_operator(self.scenario, self.psi0.grid)


def _continuity(ctx: _Context) -> List[ResidualReport]:
    return [
        theorems.check_continuity(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("continuity")),
        theorems.check_global_balance(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("global_balance")),
    ]


def _ehrenfest_position(ctx: _Context) -> List[ResidualReport]:
    return [
        theorems.check_ehrenfest_position(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("ehrenfest_position")),
        theorems.check_breakdown_identity(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("breakdown_identity")),
    ]


def _ehrenfest_momentum(ctx: _Context) -> List[ResidualReport]:
    return [
        theorems.check_ehrenfest_momentum(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("ehrenfest_momentum")),
        theorems.check_momentum_forms(ctx.traj, ctx.pot, ctx.cfg, ctx.tol("momentum_forms")),
    ]


def _hermitian_identities(ctx: _Context) -> List[ResidualReport]:
    try:
        report = theorems.check_hermitian_identities(
            ctx.pot, ctx.cfg, ctx.operator, ctx.psi0, ctx.tol("hermitian_identities")
        )
    except NonHermitianError as e:
        report = ResidualReport(
            identity="hermitian_identities",
            variant=ctx.cfg.variant,
            grid_n=ctx.psi0.grid.n,
            dx=ctx.psi0.grid.dx,
            dt=ctx.cfg.dt,
            max_residual=e.defect,
            l2_residual=e.defect,
            tolerance=settings.TOL_HERMITICITY_DEFECT,
            passed=False,
            note=f"refused: {e}",
            conditions_met=False,
        )
    return [report]


def _evolution_identities(ctx: _Context) -> List[ResidualReport]:
    return [
        theorems.check_evolution_identities(
            ctx.traj, ctx.pot, ctx.cfg, ctx.operator, ctx.tol("evolution_identities")
        )
    ]


def _stationarity(ctx: _Context) -> List[ResidualReport]:
    return [theorems.check_stationarity(ctx.traj, ctx.pot, ctx.cfg, ctx.operator, ctx.tol("stationarity"))]


def _oracle_compare(ctx: _Context) -> List[ResidualReport]:
    v = ctx.psi0.values
    cpsi0 = CField(ctx.psi0.grid, v[:, 0] + 1j * v[:, 1])
    ctraj = evolve_complex(
        cpsi0, ctx.pot.V0, ctx.pot.alpha, ctx.cfg, sample_every=ctx.scenario.time.sample_every
    )
    return [compare(ctx.traj, ctraj, ctx.cfg, ctx.tol("oracle_compare"))]


CHECKS: Dict[str, Callable[[_Context], List[ResidualReport]]] = {
    "continuity": _continuity,
    "ehrenfest_position": _ehrenfest_position,
    "ehrenfest_momentum": _ehrenfest_momentum,
    "hermitian_identities": _hermitian_identities,
    "evolution_identities": _evolution_identities,
    "stationarity": _stationarity,
    "oracle_compare": _oracle_compare,
}


def write_observables_csv(path: Path, rows: List[ObservableSample]) -> None:
    with atomic_writer(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["time", "name", "value"])
        for row in rows:
            writer.writerow([repr(row.time), row.name, repr(row.value)])


def write_reports_json(path: Path, reports: List[ResidualReport]) -> None:
    with atomic_writer(path) as handle:
        json.dump([report.to_json_row() for report in reports], handle, indent=2)
        handle.write("\n")


def run(scenario: Scenario, out_dir: Path, tol_scale: float = 1.0) -> RunResult:
    """
    Evolve the scenario, run its checks and write the artifacts

    Args:
        scenario: Parsed scenario
        out_dir: Receives <name>_observables.csv, <name>_reports.json and, with dump_fields, <name>_fields.csv
        tol_scale: Factor applied to every tolerance

    Returns:
        RunResult: Reports in check order and the written artifact paths
    """
    if not np.isfinite(tol_scale) or tol_scale <= 0:
        raise ValueError(f"tol_scale must be a positive number, got {tol_scale}")
    out_dir = Path(out_dir)
    grid = build_grid(scenario)
    cfg = build_config(scenario)
    pot = build_potential(scenario, grid)
    psi0 = build_initial_state(scenario, grid)

    logger.info(
        f"Running '{scenario.name}': {cfg.variant.value.upper()}, n={grid.n}, "
        f"{cfg.steps} steps of {cfg.dt:.1e}, checks={list(scenario.checks)}"
    )
    traj = evolve(psi0, pot, cfg, sample_every=scenario.time.sample_every)
    ctx = _Context(scenario=scenario, cfg=cfg, pot=pot, psi0=psi0, traj=traj)

    result = RunResult(name=scenario.name)
    for check in scenario.checks:
        for report in CHECKS[check](ctx):
            result.reports.append(report.rescaled(tol_scale) if tol_scale != 1.0 else report)

    rows = sample_observables(traj, pot, cfg, scenario.outputs.observables)
    observables_path = out_dir / f"{scenario.name}_observables.csv"
    reports_path = out_dir / f"{scenario.name}_reports.json"
    write_observables_csv(observables_path, rows)
    write_reports_json(reports_path, result.reports)
    result.artifacts += [observables_path, reports_path]
    if scenario.outputs.dump_fields:
        fields_path = out_dir / f"{scenario.name}_fields.csv"
        write_field_csv(fields_path, traj.final)
        result.artifacts.append(fields_path)

    if result.passed:
        logger.success(f"'{scenario.name}': {len(result.reports)} reports passed")
    else:
        logger.error(f"'{scenario.name}': failed {', '.join(result.failures)}")
    return result
