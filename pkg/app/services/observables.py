"""
Density, gauge-invariant momentum, probability current, source and
expectation values for both wave equations.

Quantities the theory defines as q + conj(q) are formed as quaternions and
checked for a vanishing imaginary residue before the real part is returned.
"""

from typing import Iterable, List, Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import ImaginaryResidueError
from app.models.report import ObservableSample
from app.models.simulation import SimulationConfig, Variant
from app.services.dynamics import Trajectory
from app.services.grid import QField, gradient
from app.services.operators import OperatorSpec, apply_operator, breakdown_operator, named_operator
from app.services.potential import PotentialSpec
from app.services.quaternion import conjugate, hamilton_product, imag_residue, left_i, norm_sq, right_i


def _assert_real(q: np.ndarray, tolerance: float) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(q[..., 0]))) if q.size else 1.0)
    residue = imag_residue(q)
    if residue > tolerance * scale:
        raise ImaginaryResidueError(residue, tolerance * scale)
    return q[..., 0].copy()


def _variant(cfg: SimulationConfig, variant: Optional[Variant]) -> Variant:
    return cfg.variant if variant is None else Variant(variant)


def density(psi: QField) -> np.ndarray:
    """rho = conj(psi) psi, real and non-negative."""
    return norm_sq(psi.values)


def norm(psi: QField) -> float:
    """Integral of rho (the squared norm)."""
    return float(np.sum(density(psi)) * psi.grid.dx)


def momentum_field(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, variant: Optional[Variant] = None
) -> QField:
    """LCWE: -i hbar (grad psi - Q psi).  RCWE: -hbar (grad psi - Q psi) i."""
    pot.check_grid(psi)
    cov = gradient(psi).values - hamilton_product(pot.Q.values, psi.values)
    if _variant(cfg, variant) == Variant.LCWE:
        return QField(psi.grid, -cfg.hbar * left_i(cov))
    return QField(psi.grid, -cfg.hbar * right_i(cov))


def current(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, variant: Optional[Variant] = None
) -> np.ndarray:
    variant = _variant(cfg, variant)
    pi_psi = momentum_field(psi, pot, cfg, variant).values
    first, second = _paired_integrands(psi.values, pi_psi, variant)
    J = (first + second) / (2.0 * cfg.mass)
    return _assert_real(J, settings.TOL_ALGEBRAIC)


def source(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, variant: Optional[Variant] = None
) -> np.ndarray:
    """LCWE: conj(psi) (V* i - i V)/hbar psi.  RCWE: (w V* - V w)/hbar with w = psi i conj(psi)."""
    pot.check_grid(psi)
    V = pot.V.values
    v = psi.values
    if _variant(cfg, variant) == Variant.LCWE:
        M = (right_i(conjugate(V)) - left_i(V)) / cfg.hbar
        g = hamilton_product(conjugate(v), hamilton_product(M, v))
    else:
        w = hamilton_product(right_i(v), conjugate(v))
        g = (hamilton_product(w, conjugate(V)) - hamilton_product(V, w)) / cfg.hbar
    return _assert_real(g, settings.TOL_ALGEBRAIC)


def _paired_integrands(psi: np.ndarray, chi: np.ndarray, variant: Variant):
    """conj(psi) chi and conj(chi) psi (LCWE), chi conj(psi) and psi conj(chi) (RCWE)."""
    if Variant(variant) == Variant.LCWE:
        return hamilton_product(conjugate(psi), chi), hamilton_product(conjugate(chi), psi)
    return hamilton_product(chi, conjugate(psi)), hamilton_product(psi, conjugate(chi))


def real_part_of_pair(
    first: np.ndarray, second: np.ndarray, tolerance: Optional[float] = None
) -> float:
    """Half of first + second, after asserting that their imaginary parts cancel."""
    tolerance = settings.TOL_EXPECTATION_RESIDUE if tolerance is None else tolerance
    total = 0.5 * (np.asarray(first) + np.asarray(second))
    residue = imag_residue(total)
    if residue > tolerance:
        raise ImaginaryResidueError(residue, tolerance)
    return float(total[0])


def field_expectation(
    psi: QField, chi: QField, variant: Variant, tolerance: Optional[float] = None
) -> float:
    """<O> for an operator given only through its image chi = O psi."""
    psi.same_grid(chi)
    first, second = _paired_integrands(psi.values, chi.values, variant)
    dx = psi.grid.dx
    return real_part_of_pair(np.sum(first, axis=0) * dx, np.sum(second, axis=0) * dx, tolerance)


def expectation(
    op: OperatorSpec,
    psi: QField,
    variant: Variant,
    tolerance: Optional[float] = None,
) -> float:
    """Half the integral of conj(psi) O psi + conj(O psi) psi; real for every operator."""
    return field_expectation(psi, apply_operator(op, psi), variant, tolerance)


def canonical_momentum(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, variant: Optional[Variant] = None
) -> float:
    """<Pi> = m * integral of J."""
    J = current(psi, pot, cfg, variant)
    return float(cfg.mass * np.sum(J) * psi.grid.dx)


def source_integral(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> float:
    return float(np.sum(source(psi, pot, cfg)) * psi.grid.dx)


def breakdown_term(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> float:
    """(2/hbar) <i V x> (LCWE) or (2/hbar) <(V x | i)> (RCWE)."""
    op = breakdown_operator(pot.V, cfg.variant)
    return 2.0 / cfg.hbar * expectation(op, psi, cfg.variant)


def sample_observables(
    traj: Trajectory,
    pot: PotentialSpec,
    cfg: SimulationConfig,
    operator_names: Iterable[str] = (),
) -> List[ObservableSample]:
    """Time series rows (time, name, value) for every trajectory sample."""
    operators = [
        (name, named_operator(name, traj.grid, cfg.variant, cfg.hbar)) for name in operator_names
    ]
    rows: List[ObservableSample] = []
    for t, psi in zip(traj.times, traj.states):
        g = source(psi, pot, cfg)
        values = [
            ("norm", norm(psi)),
            ("source_integral", float(np.sum(g) * psi.grid.dx)),
            ("max_abs_source", float(np.max(np.abs(g)))),
            ("canonical_momentum", canonical_momentum(psi, pot, cfg)),
            ("breakdown_term", breakdown_term(psi, pot, cfg)),
        ]
        values += [(f"<{name}>", expectation(op, psi, cfg.variant)) for name, op in operators]
        rows.extend(ObservableSample(time=t, name=name, value=value) for name, value in values)
    return rows
