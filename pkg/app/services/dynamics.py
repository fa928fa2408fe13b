"""
LCWE and RCWE Hamiltonians, time derivatives and the RK4 propagator.

LCWE:  i hbar dPsi/dt = H Psi,  H = (hbar^2/2m) D(D(Psi)) + V Psi,  D(f) = i (grad f - Q f)
RCWE:  hbar (dPsi/dt) i = H Psi, H = -(hbar^2/2m) E(E(Psi)) + V Psi, E(f) = grad f - Q f

The nested gradient in D(D(.)) and E(E(.)) is taken with the compact
three-point Laplacian so that Q = 0 reduces both kinetic terms to
-(hbar^2/2m) laplacian.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.core.exceptions import GridMismatchError, NaNDetectedError
from app.core.logger import logger
from app.models.simulation import GridSpec, SimulationConfig, Variant
from app.services.grid import QField, inner_product
from app.services.potential import PotentialSpec
from app.services.quaternion import Quaternion, hamilton_product, left_i, right_i


@dataclass
class Trajectory:
    grid: GridSpec
    times: List[float] = field(default_factory=list)
    states: List[QField] = field(default_factory=list)

    def append(self, t: float, state: QField) -> None:
        if state.grid != self.grid:
            raise GridMismatchError("trajectory states must share one grid")
        if self.times and t <= self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(float(t))
        self.states.append(state)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def sample_dt(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return self.times[1] - self.times[0]

    @property
    def final(self) -> QField:
        return self.states[-1]


def _grad(v: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * dx)


def _lap(v: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(v, -1, axis=0) - 2.0 * v + np.roll(v, 1, axis=0)) / dx ** 2


def _kinetic_lcwe(v: np.ndarray, pot: PotentialSpec) -> np.ndarray:
    """D(D(v)) = -(lap v - grad(Q v)) - i Q i (grad v - Q v)."""
    dx = pot.grid.dx
    if not pot.has_vector_potential:
        return -_lap(v, dx)
    Q = pot.Q.values
    Qv = hamilton_product(Q, v)
    g = _grad(v, dx) - Qv
    iQi = left_i(right_i(Q))
    return -(_lap(v, dx) - _grad(Qv, dx)) - hamilton_product(iQi, g)


def _kinetic_rcwe(v: np.ndarray, pot: PotentialSpec) -> np.ndarray:
    """E(E(v)) = lap v - grad(Q v) - Q grad v + Q Q v."""
    dx = pot.grid.dx
    if not pot.has_vector_potential:
        return _lap(v, dx)
    Q = pot.Q.values
    Qv = hamilton_product(Q, v)
    return _lap(v, dx) - _grad(Qv, dx) - hamilton_product(Q, _grad(v, dx)) + hamilton_product(Q, Qv)


def _apply_H_values(v: np.ndarray, pot: PotentialSpec, cfg: SimulationConfig) -> np.ndarray:
    c = cfg.hbar ** 2 / (2.0 * cfg.mass)
    Vv = hamilton_product(pot.V.values, v)
    if cfg.variant == Variant.LCWE:
        return c * _kinetic_lcwe(v, pot) + Vv
    return -c * _kinetic_rcwe(v, pot) + Vv


def _time_derivative_values(v: np.ndarray, pot: PotentialSpec, cfg: SimulationConfig) -> np.ndarray:
    Hv = _apply_H_values(v, pot, cfg)
    if cfg.variant == Variant.LCWE:
        return -left_i(Hv) / cfg.hbar
    return -right_i(Hv) / cfg.hbar


def apply_H_lcwe(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> QField:
    pot.check_grid(psi)
    return QField(psi.grid, _apply_H_values(psi.values, pot, cfg.with_variant(Variant.LCWE)))


def apply_H_rcwe(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> QField:
    pot.check_grid(psi)
    return QField(psi.grid, _apply_H_values(psi.values, pot, cfg.with_variant(Variant.RCWE)))


def apply_H(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> QField:
    """H psi for the configured variant."""
    pot.check_grid(psi)
    return QField(psi.grid, _apply_H_values(psi.values, pot, cfg))


def time_derivative(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> QField:
    """LCWE: -(i/hbar) H psi.  RCWE: -(1/hbar) (H psi) i."""
    pot.check_grid(psi)
    return QField(psi.grid, _time_derivative_values(psi.values, pot, cfg))


def _rk4_values(v: np.ndarray, pot: PotentialSpec, cfg: SimulationConfig) -> np.ndarray:
    dt = cfg.dt
    k1 = _time_derivative_values(v, pot, cfg)
    k2 = _time_derivative_values(v + 0.5 * dt * k1, pot, cfg)
    k3 = _time_derivative_values(v + 0.5 * dt * k2, pot, cfg)
    k4 = _time_derivative_values(v + dt * k3, pot, cfg)
    return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> QField:
    pot.check_grid(psi)
    out = _rk4_values(psi.values, pot, cfg)
    if not np.all(np.isfinite(out)):
        raise NaNDetectedError(step=1)
    return QField(psi.grid, out)


def check_stability(grid: GridSpec, cfg: SimulationConfig) -> bool:
    """Advisory bound dt <= safety * dx^2 * m / hbar; warns, never fails."""
    limit = cfg.stability_limit(grid)
    if cfg.dt > limit:
        logger.warning(
            f"dt={cfg.dt:.3e} exceeds the advisory stability bound {limit:.3e} "
            f"(n={grid.n}, safety={cfg.safety_factor})"
        )
        return False
    return True


def evolve(
    psi0: QField,
    pot: PotentialSpec,
    cfg: SimulationConfig,
    sample_every: int = 1,
    t0: float = 0.0,
) -> Trajectory:
    """
    Advance psi0 by cfg.steps RK4 steps

    Args:
        psi0: Initial state
        pot: Potentials on the same grid as psi0
        cfg: Step size, step count and variant
        sample_every: Record every sample_every-th state
        t0: Time of the initial state

    Returns:
        Trajectory: Recorded (time, state) samples, psi0 first

    Raises:
        NaNDetectedError: A component stopped being finite
    """
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    pot.check_grid(psi0)
    check_stability(psi0.grid, cfg)

    logger.debug(
        f"Evolving {cfg.variant.value.upper()} for {cfg.steps} steps "
        f"(dt={cfg.dt:.2e}, n={psi0.grid.n}, stride={sample_every})"
    )
    traj = Trajectory(grid=psi0.grid)
    traj.append(t0, psi0)
    v = psi0.values
    for step in range(1, cfg.steps + 1):
        v = _rk4_values(v, pot, cfg)
        if not np.all(np.isfinite(v)):
            logger.error(f"Non-finite state at step {step}")
            raise NaNDetectedError(step=step)
        if step % sample_every == 0:
            traj.append(t0 + step * cfg.dt, QField(psi0.grid, v))
    return traj


def hermiticity_defect(pot: PotentialSpec, cfg: SimulationConfig, f: QField, g: QField) -> Quaternion:
    """<f, H g> - <H f, g> for the configured variant."""
    f.same_grid(g)
    return inner_product(f, apply_H(g, pot, cfg)) - inner_product(apply_H(f, pot, cfg), g)


def max_hermiticity_defect(
    pot: PotentialSpec,
    cfg: SimulationConfig,
    samples: int = 4,
    seed: int = 0,
    extra: Optional[List[QField]] = None,
) -> float:
    """Largest |defect| over seeded random smooth field pairs (plus any extra fields),
    relative to ||f|| ||Hg|| + ||Hf|| ||g||.
    """
    rng = np.random.default_rng(seed)
    grid = pot.grid
    x = grid.x
    fields = list(extra or [])
    for _ in range(samples):
        values = np.zeros((grid.n, 4))
        for mode in range(1, 4):
            k = grid.wavenumber(mode)
            values += rng.normal(size=4) * np.cos(k * x + rng.uniform(0, 2 * np.pi))[:, None]
        fields.append(QField(grid, values))
    worst = 0.0
    for a in fields:
        Ha = apply_H(a, pot, cfg)
        for b in fields:
            Hb = apply_H(b, pot, cfg)
            scale = a.l2_norm() * Hb.l2_norm() + Ha.l2_norm() * b.l2_norm()
            if scale == 0.0:
                continue
            defect = inner_product(a, Hb) - inner_product(Ha, b)
            worst = max(worst, np.sqrt(defect.norm_sq()) / scale)
    return float(worst)
