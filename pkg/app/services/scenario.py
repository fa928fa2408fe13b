"""
Scenario files: parsing with line-level diagnostics, bundled scenarios, and
construction of the grid, configuration, potential and initial state.
"""

import json
import re
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ScenarioError
from app.core.logger import logger
from app.models.scenario import Component, GaussianPacket, PlaneWave, Scenario
from app.models.simulation import GridSpec, SimulationConfig
from app.services.grid import QField
from app.services.operators import OPERATOR_NAMES, OperatorSpec, named_operator
from app.services.potential import PotentialSpec

_PATH_PREFIX = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*): ")


def _locate(text: str, path: Sequence) -> Optional[int]:
    """Line (1-based) of the deepest key of path that can be found in order."""
    lines = text.splitlines()
    line, found = 0, None
    for part in path:
        if not isinstance(part, str):
            continue
        needle = f'"{part}"'
        for index in range(line, len(lines)):
            if needle in lines[index]:
                line, found = index, index + 1
                break
    return found


def _describe(error: dict) -> tuple:
    message = error["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    path = [part for part in error["loc"] if isinstance(part, (str, int))]
    match = _PATH_PREFIX.match(message)
    if match:
        path = path + match.group(1).split(".")
        message = message[match.end():]
    where = ".".join(str(part) for part in path)
    return path, f"{where}: {message}" if where else message


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: malformed JSON ({e.msg}, column {e.colno})", line=e.lineno) from None
    try:
        scenario = Scenario.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        path, message = _describe(first)
        extra = f" (+{e.error_count() - 1} more)" if e.error_count() > 1 else ""
        raise ScenarioError(f"{source}: {message}{extra}", line=_locate(text, path)) from None

    names = [("check_operator", scenario.check_operator)]
    names += [("observables", name) for name in scenario.outputs.observables]
    for key, name in names:
        if name not in OPERATOR_NAMES:
            raise ScenarioError(
                f"{source}: {key}: unknown operator '{name}'; known: {', '.join(OPERATOR_NAMES)}",
                line=_locate(text, [key]),
            )
    logger.info(f"Parsed scenario '{scenario.name}' from {source}")
    return scenario


def parse_scenario(path: Path) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_scenario_text(text, source=path.name)


def list_scenarios(directory: Optional[Path] = None) -> List[Path]:
    directory = Path(directory or settings.SCENARIO_DIR)
    if not directory.is_dir():
        raise FileNotFoundError(f"scenario directory not found: {directory}")
    return sorted(directory.glob("*.json"))


def bundled_scenario_path(name: str) -> Path:
    path = Path(settings.SCENARIO_DIR) / f"{name}.json"
    if not path.is_file():
        known = ", ".join(p.stem for p in list_scenarios())
        raise ScenarioError(f"no bundled scenario '{name}'; available: {known}")
    return path


# Construction

def build_grid(scenario: Scenario) -> GridSpec:
    return GridSpec(n=scenario.grid.n, length=scenario.grid.length)


def build_config(scenario: Scenario) -> SimulationConfig:
    fields = dict(
        hbar=scenario.hbar,
        mass=scenario.mass,
        dt=scenario.time.dt,
        steps=scenario.time.steps,
        variant=scenario.variant,
    )
    if scenario.safety_factor is not None:
        fields["safety_factor"] = scenario.safety_factor
    return SimulationConfig(**fields)


def _component(component: Component, grid: GridSpec, mass: float) -> np.ndarray:
    if isinstance(component, list):
        return np.asarray(component, dtype=np.float64)
    return component.evaluate(grid.x, mass)


def build_potential(scenario: Scenario, grid: GridSpec) -> PotentialSpec:
    p, m = scenario.potential, scenario.mass

    def c(component: Component) -> np.ndarray:
        return _component(component, grid, m)

    return PotentialSpec.build(
        grid,
        alpha=c(p.alpha),
        beta=c(p.beta_re) + 1j * c(p.beta_im),
        V0=c(p.v0_re) + 1j * c(p.v0_im),
        V1=c(p.v1_re) + 1j * c(p.v1_im),
    )


def _mixed(grid: GridSpec, profile: np.ndarray, mix: Sequence[float]) -> QField:
    """profile * (c0 + c1 i + c2 j + c3 k) with the complex profile on the left."""
    z = profile * complex(mix[0], mix[1])
    zeta = profile * complex(mix[2], mix[3])
    return QField.from_complex(grid, z, zeta)


def build_initial_state(scenario: Scenario, grid: GridSpec) -> QField:
    state = scenario.initial_state
    x = grid.x
    if isinstance(state, GaussianPacket):
        profile = np.exp(-((x - state.center) ** 2) / (4.0 * state.width ** 2) + 1j * state.k0 * x)
        profile = profile / np.sqrt(np.sum(np.abs(profile) ** 2) * grid.dx)
        return _mixed(grid, profile, state.quaternion_mix)
    if isinstance(state, PlaneWave):
        profile = np.exp(1j * grid.wavenumber(state.k_index) * x) / np.sqrt(grid.length)
        return _mixed(grid, profile, state.quaternion_mix)
    return QField(grid, np.asarray(state.values, dtype=np.float64))


def build_operator(scenario: Scenario, grid: GridSpec, name: Optional[str] = None) -> OperatorSpec:
    return named_operator(name or scenario.check_operator, grid, scenario.variant, scenario.hbar)
