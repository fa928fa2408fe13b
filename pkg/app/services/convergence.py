"""
Refinement studies behind the verify suite: pointwise continuity residual
under grid refinement and RK4 trajectory error under step refinement.
"""

from typing import List, Sequence, Tuple

import numpy as np

from app.core.logger import logger
from app.models.report import ConvergenceFit, ResidualReport
from app.models.simulation import GridSpec, SimulationConfig, Variant
from app.services.dynamics import evolve
from app.services.grid import QField
from app.services.oracle import compare, plane_wave_reference
from app.services.potential import PotentialSpec
from app.services.theorems import check_continuity, fit_convergence

SPATIAL_ORDER = (2.0, 0.2)
TEMPORAL_ORDER = (4.0, 0.3)


def continuity_study(
    ns: Sequence[int] = (128, 256, 512),
    length: float = 20.0,
    width: float = 1.5,
    k0: float = 1.0,
    dt: float = 1e-4,
    steps: int = 200,
    sample_every: int = 10,
    variant: Variant = Variant.LCWE,
) -> Tuple[List[ResidualReport], ConvergenceFit]:
    """Free complex Gaussian packet, continuity residual at each n."""
    cfg = SimulationConfig(dt=dt, steps=steps, variant=variant)
    reports = []
    for n in ns:
        grid = GridSpec(n=n, length=length)
        x = grid.x
        z = np.exp(-(x ** 2) / (4.0 * width ** 2) + 1j * k0 * x)
        z = z / np.sqrt(np.sum(np.abs(z) ** 2) * grid.dx)
        psi0 = QField.from_complex(grid, z)
        pot = PotentialSpec.free(grid)
        traj = evolve(psi0, pot, cfg, sample_every=sample_every)
        reports.append(check_continuity(traj, pot, cfg))
    fit = fit_convergence(reports)
    logger.info(f"continuity order in dx: {fit.fitted_order:.3f}")
    return reports, fit


def rk4_study(
    dts: Sequence[float] = (4e-4, 2e-4, 1e-4),
    n: int = 64,
    length: float = 2.0 * np.pi,
    k_index: int = 20,
    total_time: float = 0.4,
    variant: Variant = Variant.LCWE,
) -> Tuple[List[ResidualReport], ConvergenceFit]:
    """Plane wave against its exact semi-discrete phase at the final time."""
    grid = GridSpec(n=n, length=length)
    pot = PotentialSpec.free(grid)
    reports = []
    for dt in dts:
        steps = int(round(total_time / dt))
        cfg = SimulationConfig(dt=dt, steps=steps, variant=variant)
        exact = plane_wave_reference(grid, k_index, cfg, [0.0])
        psi0 = QField.from_complex(grid, exact.states[0].values)
        traj = evolve(psi0, pot, cfg, sample_every=steps)
        reference = plane_wave_reference(grid, k_index, cfg, traj.times)
        reports.append(compare(traj, reference, cfg))
    fit = fit_convergence(reports)
    logger.info(f"RK4 order in dt: {fit.fitted_order:.3f}")
    return reports, fit
