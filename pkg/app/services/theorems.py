"""
Numerical checks of the conservation laws and expectation-value identities.

Every check consumes a sampled trajectory (or a single state), evaluates the
identity at interior samples with centered time differences, and returns a
ResidualReport judged against a configurable tolerance. Operators handed to
the checks are time-independent, so every explicit time-derivative term of
an identity is zero.
"""

from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DegenerateVariationError,
    NonHermitianError,
    PreconditionError,
    TooFewSamplesError,
)
from app.core.logger import logger
from app.models.report import ConvergenceFit, FitParameter, ResidualReport
from app.models.simulation import SimulationConfig, Variant
from app.services.dynamics import Trajectory, apply_H, evolve, max_hermiticity_defect
from app.services.grid import QField, gradient
from app.services.observables import (
    breakdown_term,
    canonical_momentum,
    current,
    density,
    expectation,
    field_expectation,
    source,
)
from app.services.operators import (
    MultiplyByField,
    OperatorSpec,
    Position,
    RightI,
    apply_operator,
    combinations,
    force,
    momentum,
    potential_times_derivative,
)
from app.services.potential import PotentialSpec
from app.services.quaternion import conjugate, hamilton_product, left_i, right_i


def _require_samples(traj: Trajectory, minimum: int = 3) -> None:
    if len(traj) < minimum:
        raise TooFewSamplesError(
            f"need at least {minimum} trajectory samples for centered differences, got {len(traj)}"
        )


def _times(traj: Trajectory) -> np.ndarray:
    return np.asarray(traj.times)


def _centered(series: np.ndarray, times: np.ndarray) -> np.ndarray:
    """d/dt at the interior samples 1..K-2."""
    span = (times[2:] - times[:-2]).reshape((-1,) + (1,) * (series.ndim - 1))
    return (series[2:] - series[:-2]) / span


def _series(traj: Trajectory, fn: Callable[[QField], float]) -> np.ndarray:
    return np.array([fn(psi) for psi in traj.states])


def _report(
    identity: str,
    cfg: SimulationConfig,
    n: int,
    dx: float,
    residual: np.ndarray,
    tolerance: float,
    details: Optional[Sequence[float]] = None,
    note: Optional[str] = None,
    passed: Optional[bool] = None,
) -> ResidualReport:
    residual = np.abs(np.asarray(residual, dtype=np.float64))
    max_residual = float(np.max(residual)) if residual.size else 0.0
    l2_residual = float(np.sqrt(np.mean(residual ** 2))) if residual.size else 0.0
    if details is None:
        details = residual.reshape(residual.shape[0], -1).max(axis=1) if residual.ndim > 1 else residual
    report = ResidualReport(
        identity=identity,
        variant=cfg.variant,
        grid_n=n,
        dx=dx,
        dt=cfg.dt,
        max_residual=max_residual,
        l2_residual=l2_residual,
        tolerance=tolerance,
        passed=max_residual <= tolerance if passed is None else passed,
        details=[float(d) for d in details],
        note=note,
    )
    logger.debug(
        f"{identity} [{cfg.variant.value}] max={max_residual:.3e} l2={l2_residual:.3e} "
        f"tol={tolerance:.1e} -> {'pass' if report.passed else 'FAIL'}"
    )
    return report


# Continuity

def check_continuity(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    Pointwise residual of d rho/dt + dJ/dx - g at interior samples

    Args:
        traj: Trajectory with at least three samples
        pot: Potentials the trajectory was evolved under
        cfg: Simulation parameters
        tolerance: Largest accepted residual, TOL_CONTINUITY_POINTWISE when None

    Returns:
        ResidualReport: One detail per interior sample
    """
    _require_samples(traj)
    tolerance = settings.TOL_CONTINUITY_POINTWISE if tolerance is None else tolerance
    t = _times(traj)
    rho = np.array([density(psi) for psi in traj.states])
    drho = _centered(rho, t)
    dx = traj.grid.dx
    residual = np.empty_like(drho)
    for row, psi in enumerate(traj.states[1:-1]):
        J = current(psi, pot, cfg)
        div_J = (np.roll(J, -1) - np.roll(J, 1)) / (2.0 * dx)
        residual[row] = drho[row] + div_J - source(psi, pot, cfg)
    return _report("continuity", cfg, traj.grid.n, dx, residual, tolerance)


def check_global_balance(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    |dN/dt - integral of g| at interior samples; the flux integrates to zero on the periodic box

    Returns:
        ResidualReport: Judged against TOL_DYNAMICAL unless tolerance is given
    """
    _require_samples(traj)
    tolerance = settings.TOL_DYNAMICAL if tolerance is None else tolerance
    dx = traj.grid.dx
    N = _series(traj, lambda psi: float(np.sum(density(psi)) * dx))
    G = _series(traj, lambda psi: float(np.sum(source(psi, pot, cfg)) * dx))
    residual = _centered(N, _times(traj)) - G[1:-1]
    return _report("global_balance", cfg, traj.grid.n, dx, residual, tolerance)


# Ehrenfest relations

def check_ehrenfest_position(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    Residual of d<x>/dt - <Pi>/m + (2/hbar) <breakdown>

    Args:
        traj: Trajectory with at least three samples
        pot: Potentials the trajectory was evolved under
        cfg: Simulation parameters
        tolerance: Largest accepted residual, TOL_DYNAMICAL when None

    Returns:
        ResidualReport: Details carry the breakdown term per interior sample
    """
    _require_samples(traj)
    tolerance = settings.TOL_DYNAMICAL if tolerance is None else tolerance
    X = _series(traj, lambda psi: expectation(Position(), psi, cfg.variant))
    P = _series(traj, lambda psi: canonical_momentum(psi, pot, cfg))
    B = _series(traj, lambda psi: breakdown_term(psi, pot, cfg))
    residual = _centered(X, _times(traj)) - P[1:-1] / cfg.mass + B[1:-1]
    peak = float(np.max(np.abs(B)))
    return _report(
        "ehrenfest_position",
        cfg,
        traj.grid.n,
        traj.grid.dx,
        residual,
        tolerance,
        details=B[1:-1],
        note=f"max |breakdown term| = {peak:.3e}",
    )


def breakdown_identity_gap(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> float:
    """Algebraic gap in the breakdown-term identity for one state.

    LCWE compares 2<iVx> with <(iV - V*i) x>; RCWE compares (2/hbar)<(Vx|i)>
    with minus the first moment of the source.
    """
    B = breakdown_term(psi, pot, cfg)
    if cfg.variant == Variant.LCWE:
        V = pot.V.values
        coefficient = QField(psi.grid, left_i(V) - right_i(conjugate(V)))
        combined = expectation(MultiplyByField(coefficient) @ Position(), psi, cfg.variant)
        return abs(cfg.hbar * B - combined)
    moment = float(np.sum(psi.grid.x * source(psi, pot, cfg)) * psi.grid.dx)
    return abs(B + moment)


def _breakdown_vanishes(pot: PotentialSpec, variant: Variant) -> bool:
    """Im V0 = 0 for LCWE, a real scalar V for RCWE."""
    if variant == Variant.LCWE:
        return bool(np.all(pot.V0.imag == 0))
    return pot.is_real_scalar


def check_breakdown_identity(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    Algebraic breakdown-term identity per sample

    When the potential cannot break the Ehrenfest relation (real V0 for
    LCWE, real scalar V for RCWE) the breakdown term and the largest |g|
    are judged as well, so a nonzero value fails the report.

    Args:
        traj: Sampled trajectory
        pot: Potentials the trajectory was evolved under
        cfg: Simulation parameters
        tolerance: Largest accepted residual, TOL_ALGEBRAIC when None

    Returns:
        ResidualReport named breakdown_identity
    """
    tolerance = settings.TOL_ALGEBRAIC if tolerance is None else tolerance
    gaps = _series(traj, lambda psi: breakdown_identity_gap(psi, pot, cfg))
    if not _breakdown_vanishes(pot, cfg.variant):
        return _report("breakdown_identity", cfg, traj.grid.n, traj.grid.dx, gaps, tolerance)

    B = np.abs(_series(traj, lambda psi: breakdown_term(psi, pot, cfg)))
    G = _series(traj, lambda psi: float(np.max(np.abs(source(psi, pot, cfg)))))
    residual = np.stack([gaps, B, G], axis=1)
    return _report(
        "breakdown_identity",
        cfg,
        traj.grid.n,
        traj.grid.dx,
        residual,
        tolerance,
        note=f"vanishing judged: max |breakdown term| = {B.max():.3e}, max |g| = {G.max():.3e}",
    )


def _momentum_integral_form(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> float:
    """2 sum Re(conj(H psi) dpsi/dx) dx (LCWE) or 2 sum Re(dpsi/dx conj(H psi)) dx (RCWE)."""
    H_psi = apply_H(psi, pot, cfg).values
    d_psi = gradient(psi).values
    if cfg.variant == Variant.LCWE:
        q = hamilton_product(conjugate(H_psi), d_psi)
    else:
        q = hamilton_product(d_psi, conjugate(H_psi))
    return float(2.0 * np.sum(q[:, 0]) * psi.grid.dx)


def _momentum_expectation_form(psi: QField, pot: PotentialSpec, cfg: SimulationConfig) -> float:
    """2<-dV/dx> + 2<-V d/dx> with dV/dx taken as the lattice commutator."""
    return 2.0 * expectation(force(pot.V), psi, cfg.variant) + 2.0 * expectation(
        potential_times_derivative(pot.V), psi, cfg.variant
    )


def _require_no_vector_potential(pot: PotentialSpec) -> None:
    if pot.has_vector_potential:
        raise PreconditionError("canonical momentum checks need Q = 0 (alpha = beta = 0)")


def check_ehrenfest_momentum(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    d<p>/dt against the integral form of the force

    Args:
        traj: Trajectory with at least three samples, evolved with Q = 0
        pot: Potentials the trajectory was evolved under
        cfg: Simulation parameters
        tolerance: Largest accepted residual, TOL_DYNAMICAL when None

    Returns:
        ResidualReport: Details carry the gap to -<dV/dx> from the pointwise gradient

    Raises:
        PreconditionError: alpha or beta is nonzero
    """
    _require_no_vector_potential(pot)
    _require_samples(traj)
    tolerance = settings.TOL_DYNAMICAL if tolerance is None else tolerance
    p_op = momentum(cfg.variant, cfg.hbar)
    P = _series(traj, lambda psi: expectation(p_op, psi, cfg.variant))
    interior = traj.states[1:-1]
    integral = np.array([_momentum_integral_form(psi, pot, cfg) for psi in interior])
    residual = _centered(P, _times(traj)) - integral

    grad_V = gradient(pot.V)
    classical = np.array(
        [-field_expectation(psi, grad_V * psi, cfg.variant) for psi in interior]
    )
    return _report(
        "ehrenfest_momentum",
        cfg,
        traj.grid.n,
        traj.grid.dx,
        residual,
        tolerance,
        details=np.abs(integral - classical),
        note="details: |d<p>/dt - <-dV/dx>| with the pointwise gradient of V",
    )


def check_momentum_forms(
    traj: Trajectory, pot: PotentialSpec, cfg: SimulationConfig, tolerance: Optional[float] = None
) -> ResidualReport:
    """
    Integral form against expectation form, plus the collapse to <-dV/dx> for real V

    Returns:
        ResidualReport: Judged against TOL_FORMS unless tolerance is given
    """
    _require_no_vector_potential(pot)
    tolerance = settings.TOL_FORMS if tolerance is None else tolerance
    gaps: List[float] = []
    for psi in traj.states:
        integral = _momentum_integral_form(psi, pot, cfg)
        expect_form = _momentum_expectation_form(psi, pot, cfg)
        gap = abs(integral - expect_form)
        if pot.is_real_scalar:
            gap = max(gap, abs(expect_form - expectation(force(pot.V), psi, cfg.variant)))
        gaps.append(gap)
    note = "real V: collapse to <-dV/dx> included" if pot.is_real_scalar else None
    return _report("momentum_forms", cfg, traj.grid.n, traj.grid.dx, np.array(gaps), tolerance, note=note)


# Hermitian Hamiltonians

def _commutator(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, op: OperatorSpec, sign: float = -1.0
) -> float:
    """<H O + sign * O H>: sign -1 gives the commutator, +1 the anticommutator."""
    H_op_psi = apply_H(apply_operator(op, psi), pot, cfg)
    op_H_psi = apply_operator(op, apply_H(psi, pot, cfg))
    return field_expectation(psi, H_op_psi + op_H_psi.scale(sign), cfg.variant)


def _hermitian_relations(
    psi: QField, pot: PotentialSpec, cfg: SimulationConfig, op: OperatorSpec
) -> Dict[str, float]:
    if cfg.variant == Variant.RCWE:
        return {"commutator": _commutator(psi, pot, cfg, op)}
    combo = combinations(op)
    H_psi = apply_H(psi, pot, cfg)
    H_op = field_expectation(psi, apply_H(apply_operator(op, psi), pot, cfg), cfg.variant)
    ioi_H = field_expectation(
        psi, QField(psi.grid, left_i(apply_operator(op, QField(psi.grid, left_i(H_psi.values))).values)),
        cfg.variant,
    )
    return {
        "h_o_plus_ioi_h": H_op + ioi_H,
        "commutator_o_minus_ioi": _commutator(psi, pot, cfg, combo["o_minus_ioi"]),
        "anticommutator_o_plus_ioi": _commutator(psi, pot, cfg, combo["o_plus_ioi"], sign=1.0),
        "commutator_oi_plus_io": _commutator(psi, pot, cfg, combo["oi_plus_io"]),
        "anticommutator_oi_minus_io": _commutator(psi, pot, cfg, combo["oi_minus_io"], sign=1.0),
    }


def check_hermitian_identities(
    pot: PotentialSpec,
    cfg: SimulationConfig,
    op: OperatorSpec,
    psi: QField,
    tolerance: Optional[float] = None,
    window: int = 20,
) -> ResidualReport:
    """
    Commutator relations for a time-independent O over a short window started at psi

    LCWE evaluates <HO> + <iOiH> and the four commutator/anticommutator
    relations; RCWE evaluates <[H, O]>. They vanish for stationary states
    of a hermitian H.

    Args:
        pot: Potentials, refused unless H is hermitian
        cfg: Simulation parameters
        op: Time-independent operator O
        psi: Start of the window
        tolerance: Largest accepted residual, TOL_HERMITIAN when None
        window: Number of RK4 steps evaluated

    Returns:
        ResidualReport: Note lists the worst value of every relation

    Raises:
        NonHermitianError: The hermiticity defect exceeds TOL_HERMITICITY_DEFECT
    """
    tolerance = settings.TOL_HERMITIAN if tolerance is None else tolerance
    defect = max_hermiticity_defect(pot, cfg, seed=settings.RANDOM_SEED, extra=[psi])
    if defect > settings.TOL_HERMITICITY_DEFECT:
        logger.error(f"Hermitian identities refused: defect {defect:.3e}")
        raise NonHermitianError(defect)

    short = cfg.model_copy(update={"steps": max(1, min(window, cfg.steps))})
    traj = evolve(psi, pot, short)
    rows = [_hermitian_relations(state, pot, cfg, op) for state in traj.states]
    names = list(rows[0])
    residual = np.array([[row[name] for name in names] for row in rows])
    worst = np.abs(residual).max(axis=0)
    note = ", ".join(f"{name}={value:.2e}" for name, value in zip(names, worst))
    return _report(
        "hermitian_identities",
        cfg,
        psi.grid.n,
        psi.grid.dx,
        residual,
        tolerance,
        note=f"hermiticity defect {defect:.2e}; {note}",
    )


def _evolution_pairs(op: OperatorSpec, variant: Variant):
    """(name, observable, generator, sign, anticommute) tuples for d<observable>/dt = sign/hbar <[H, generator]>."""
    if variant == Variant.RCWE:
        return [("o_right_i", RightI(op), op, -1.0, False)]
    combo = combinations(op)
    return [
        ("o_minus_ioi", combo["o_minus_ioi"], combo["oi_plus_io"], 1.0, False),
        ("oi_plus_io", combo["oi_plus_io"], combo["o_minus_ioi"], -1.0, False),
        ("o_plus_ioi", combo["o_plus_ioi"], combo["oi_minus_io"], -1.0, True),
        ("oi_minus_io", combo["oi_minus_io"], combo["o_plus_ioi"], 1.0, True),
    ]


def check_evolution_identities(
    traj: Trajectory,
    pot: PotentialSpec,
    cfg: SimulationConfig,
    op: OperatorSpec,
    tolerance: Optional[float] = None,
) -> ResidualReport:
    """
    Gap between d<A>/dt and its commutator side for each combination A

    The gap is the trailing partial-derivative term of each identity; it is
    zero for hermitian H and generally nonzero otherwise. RCWE uses
    d<(O|i)>/dt = (1/hbar) <[O, H]>, i.e. sign -1 on <[H, O]>.

    Args:
        traj: Trajectory with at least three samples
        pot: Potentials the trajectory was evolved under
        cfg: Simulation parameters
        op: Time-independent operator O
        tolerance: Largest accepted gap, TOL_DYNAMICAL when None

    Returns:
        ResidualReport: One column per combination
    """
    _require_samples(traj)
    tolerance = settings.TOL_DYNAMICAL if tolerance is None else tolerance
    t = _times(traj)
    interior = traj.states[1:-1]
    columns = []
    for _, observable, generator, sign, anti in _evolution_pairs(op, cfg.variant):
        lhs = _centered(_series(traj, lambda psi: expectation(observable, psi, cfg.variant)), t)
        rhs = np.array(
            [
                sign / cfg.hbar * _commutator(psi, pot, cfg, generator, 1.0 if anti else -1.0)
                for psi in interior
            ]
        )
        columns.append(lhs - rhs)
    residual = np.stack(columns, axis=1)
    return _report("evolution_identities", cfg, traj.grid.n, traj.grid.dx, residual, tolerance)


def check_stationarity(
    traj: Trajectory,
    pot: PotentialSpec,
    cfg: SimulationConfig,
    op: OperatorSpec,
    tolerance: Optional[float] = None,
) -> ResidualReport:
    """
    Drift of the four combinations (LCWE) or of <O> (RCWE) from their first value

    Returns:
        ResidualReport: Passes, with note "stationary", only if every drift is below tolerance
    """
    _require_samples(traj)
    tolerance = settings.TOL_STATIONARITY if tolerance is None else tolerance
    if cfg.variant == Variant.LCWE:
        monitored = list(combinations(op).values())
    else:
        monitored = [op]
    drifts = []
    for observable in monitored:
        values = _series(traj, lambda psi: expectation(observable, psi, cfg.variant))
        drifts.append(np.abs(values - values[0]))
    residual = np.stack(drifts, axis=1)
    worst = residual.max(axis=0)
    stationary = bool(np.all(worst <= tolerance))
    return _report(
        "stationarity",
        cfg,
        traj.grid.n,
        traj.grid.dx,
        residual,
        tolerance,
        details=worst,
        note="stationary" if stationary else "non-stationary",
        passed=stationary,
    )


# Convergence

def fit_convergence(reports: Sequence[ResidualReport]) -> ConvergenceFit:
    """Least-squares slope of log(max residual) against log(dx) or log(dt)."""
    if len(reports) < 3:
        raise DegenerateVariationError(f"need at least 3 reports, got {len(reports)}")
    dxs = {r.dx for r in reports}
    dts = {r.dt for r in reports}
    if len(dxs) > 1 and len(dts) == 1:
        parameter = FitParameter.DX
    elif len(dts) > 1 and len(dxs) == 1:
        parameter = FitParameter.DT
    else:
        raise DegenerateVariationError("reports must vary exactly one of dx and dt")

    values = np.array([getattr(r, parameter.value) for r in reports])
    residuals = np.array([r.max_residual for r in reports])
    if len(set(values)) != len(values):
        raise DegenerateVariationError(f"repeated {parameter.value} values")
    if np.any(residuals <= 0.0) or np.ptp(np.log(residuals)) < 1e-12:
        raise DegenerateVariationError("residuals do not vary with the refined parameter")

    order = np.argsort(values)[::-1]
    values, residuals = values[order], residuals[order]
    slope = float(np.polyfit(np.log(values), np.log(residuals), 1)[0])
    return ConvergenceFit(
        parameter=parameter,
        samples=[(float(v), float(r)) for v, r in zip(values, residuals)],
        fitted_order=slope,
    )
