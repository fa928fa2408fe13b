"""
Reference complex Schrodinger solver.

    i hbar dpsi/dt = [-(hbar^2/2m) (d/dx - iA)^2 + V0] psi

Stencils and the RK4 loop are written here again on complex arrays and
nothing from the quaternion modules is imported, so agreement with the
quaternionic propagator in the complex limit is an independent result.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import GridMismatchError, NaNDetectedError
from app.core.logger import logger
from app.models.report import ResidualReport
from app.models.simulation import GridSpec, SimulationConfig

if TYPE_CHECKING:
    from app.services.dynamics import Trajectory


@dataclass(frozen=True, eq=False)
class CField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != (self.grid.n,):
            raise GridMismatchError(f"complex field of shape {values.shape} on a grid of {self.grid.n}")
        if not np.all(np.isfinite(values)):
            raise NaNDetectedError(step=0, message="complex field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dx)


@dataclass
class ComplexTrajectory:
    grid: GridSpec
    times: List[float] = field(default_factory=list)
    states: List[CField] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)


def _ddx(f: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)


def _d2dx2(f: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / dx ** 2


def _hamiltonian(f: np.ndarray, V0: np.ndarray, A: np.ndarray, dx: float, cfg: SimulationConfig) -> np.ndarray:
    iA = 1j * A
    covariant = _d2dx2(f, dx) - _ddx(iA * f, dx) - iA * _ddx(f, dx) + iA * iA * f
    return -(cfg.hbar ** 2 / (2.0 * cfg.mass)) * covariant + V0 * f


def _rhs(f: np.ndarray, V0: np.ndarray, A: np.ndarray, dx: float, cfg: SimulationConfig) -> np.ndarray:
    return -1j / cfg.hbar * _hamiltonian(f, V0, A, dx, cfg)


def evolve_complex(
    psi0: CField,
    V0,
    A,
    cfg: SimulationConfig,
    sample_every: int = 1,
    t0: float = 0.0,
) -> ComplexTrajectory:
    """RK4 with the step size and step count of cfg."""
    grid = psi0.grid
    V0 = np.broadcast_to(np.asarray(V0, dtype=np.complex128), (grid.n,))
    A = np.broadcast_to(np.asarray(A, dtype=np.float64), (grid.n,))
    dx, dt = grid.dx, cfg.dt

    traj = ComplexTrajectory(grid=grid, times=[t0], states=[psi0])
    f = psi0.values
    for step in range(1, cfg.steps + 1):
        k1 = _rhs(f, V0, A, dx, cfg)
        k2 = _rhs(f + 0.5 * dt * k1, V0, A, dx, cfg)
        k3 = _rhs(f + 0.5 * dt * k2, V0, A, dx, cfg)
        k4 = _rhs(f + dt * k3, V0, A, dx, cfg)
        f = f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(f)):
            raise NaNDetectedError(step=step)
        if step % sample_every == 0:
            traj.times.append(t0 + step * dt)
            traj.states.append(CField(grid, f))
    return traj


def plane_wave_reference(
    grid: GridSpec, k_index: int, cfg: SimulationConfig, times: Sequence[float]
) -> ComplexTrajectory:
    """Exact semi-discrete evolution of a unit-norm plane wave with V = 0, A = 0."""
    k = grid.wavenumber(k_index)
    energy = cfg.hbar ** 2 / (2.0 * cfg.mass) * (2.0 - 2.0 * np.cos(k * grid.dx)) / grid.dx ** 2
    base = np.exp(1j * k * grid.x) / np.sqrt(grid.length)
    traj = ComplexTrajectory(grid=grid)
    for t in times:
        traj.times.append(float(t))
        traj.states.append(CField(grid, base * np.exp(-1j * energy * t / cfg.hbar)))
    return traj


def compare(
    qtraj: "Trajectory",
    ctraj: ComplexTrajectory,
    cfg: SimulationConfig,
    tolerance: Optional[float] = None,
) -> ResidualReport:
    """Per-sample L2 distance between a quaternionic run and a complex one (j, k parts set to 0)."""
    tolerance = settings.TOL_ORACLE if tolerance is None else tolerance
    if qtraj.grid != ctraj.grid or len(qtraj) != len(ctraj):
        raise GridMismatchError(
            f"cannot compare {len(qtraj)} samples on n={qtraj.grid.n} "
            f"with {len(ctraj)} samples on n={ctraj.grid.n}"
        )
    if not np.allclose(qtraj.times, ctraj.times, rtol=0.0, atol=1e-12):
        raise GridMismatchError("trajectories are sampled at different times")

    dx = qtraj.grid.dx
    distances, outside = [], 0.0
    for q, c in zip(qtraj.states, ctraj.states):
        v = q.values
        diff = np.abs(v[:, 0] - c.values.real) ** 2 + np.abs(v[:, 1] - c.values.imag) ** 2
        diff = diff + v[:, 2] ** 2 + v[:, 3] ** 2
        distances.append(np.sqrt(np.sum(diff) * dx))
        outside = max(outside, float(np.max(np.abs(v[:, 2:]))))
    distances = np.array(distances)
    max_distance = float(distances.max())
    confined = outside <= settings.TOL_ALGEBRAIC
    passed = max_distance <= tolerance and confined
    if not passed:
        logger.warning(f"oracle mismatch: L2 {max_distance:.3e}, max |j,k| {outside:.3e}")
    return ResidualReport(
        identity="oracle_compare",
        variant=cfg.variant,
        grid_n=qtraj.grid.n,
        dx=dx,
        dt=cfg.dt,
        max_residual=max_distance,
        l2_residual=float(np.sqrt(np.mean(distances ** 2))),
        tolerance=tolerance,
        passed=passed,
        details=[float(d) for d in distances],
        note=f"max |j,k component| = {outside:.3e}",
        conditions_met=confined,
    )
