import numpy as np
import pytest

from app.core.exceptions import GridMismatchError, NaNDetectedError
from app.models.simulation import GridSpec, SimulationConfig, Variant
from app.services.dynamics import (
    Trajectory,
    apply_H,
    apply_H_lcwe,
    apply_H_rcwe,
    check_stability,
    evolve,
    hermiticity_defect,
    max_hermiticity_defect,
    step_rk4,
    time_derivative,
)
from app.services.grid import QField, inner_product
from app.services.observables import norm
from app.services.potential import PotentialSpec
from app.services.quaternion import Quaternion, left_i

from tests.conftest import gaussian, random_field, random_potential


def complex_part(f):
    return QField.from_complex(f.grid, f.values[:, 0] + 1j * f.values[:, 1])


def dispersion(grid, k_index, cfg):
    kdx = grid.wavenumber(k_index) * grid.dx
    return cfg.hbar ** 2 / (2.0 * cfg.mass) * (2.0 - 2.0 * np.cos(kdx)) / grid.dx ** 2


@pytest.mark.parametrize("variant", list(Variant))
def test_free_plane_wave_is_eigenstate(small_grid, variant):
    cfg = SimulationConfig(variant=variant, hbar=1.3, mass=0.8)
    f = QField.from_complex(small_grid, np.exp(1j * small_grid.wavenumber(5) * small_grid.x))
    Hf = apply_H(f, PotentialSpec.free(small_grid), cfg)
    np.testing.assert_allclose(Hf.values, dispersion(small_grid, 5, cfg) * f.values, atol=1e-10)


def test_constant_state_with_constant_vector_potential(grid, cfg):
    c = cfg.hbar ** 2 / (2.0 * cfg.mass)
    psi = QField.constant(grid, Quaternion(0.3, -0.2, 0.5, 0.1))
    V0 = 0.25

    along_i = PotentialSpec.build(grid, alpha=0.7, V0=V0)
    expected = (c * 0.7 ** 2 + V0) * psi.values
    np.testing.assert_allclose(apply_H_lcwe(psi, along_i, cfg).values, expected, atol=1e-12)
    np.testing.assert_allclose(apply_H_rcwe(psi, along_i, cfg).values, expected, atol=1e-12)

    # Q = beta j: LCWE picks up -|beta|^2, RCWE +|beta|^2
    along_j = PotentialSpec.build(grid, beta=0.6 - 0.8j, V0=V0)
    np.testing.assert_allclose(
        apply_H_lcwe(psi, along_j, cfg).values, (V0 - c) * psi.values, atol=1e-12
    )
    np.testing.assert_allclose(
        apply_H_rcwe(psi, along_j, cfg).values, (V0 + c) * psi.values, atol=1e-12
    )


def test_variants_agree_on_complex_states(grid, cfg, rcwe_cfg):
    x = grid.x
    pot = PotentialSpec.build(
        grid,
        alpha=0.3 * np.exp(-(x ** 2) / 2.0),
        V0=0.5 * x ** 2 - 0.1j * np.exp(-((x - 1.0) ** 2)),
    )
    psi0 = gaussian(grid, center=-1.0, k0=1.0)
    np.testing.assert_allclose(
        time_derivative(psi0, pot, cfg).values, time_derivative(psi0, pot, rcwe_cfg).values, atol=1e-12
    )
    cfg = cfg.model_copy(update={"steps": 50})
    lcwe = evolve(psi0, pot, cfg, sample_every=50)
    rcwe = evolve(psi0, pot, cfg.with_variant(Variant.RCWE), sample_every=50)
    np.testing.assert_allclose(lcwe.final.values, rcwe.final.values, atol=1e-12)


def test_complex_subspace_is_invariant(grid, cfg):
    x = grid.x
    pot = PotentialSpec.build(grid, alpha=0.2 * np.tanh(x), V0=0.5 * x ** 2 - 0.3j)
    traj = evolve(gaussian(grid, k0=2.0, mix=(0.6, 0.8, 0.0, 0.0)), pot, cfg, sample_every=25)
    assert all(state.is_complex() for state in traj.states)


@pytest.mark.parametrize("variant", list(Variant))
def test_norm_is_conserved_for_real_potential(grid, harmonic, variant):
    cfg = SimulationConfig(dt=1e-4, steps=1000, variant=variant)
    psi0 = gaussian(grid, center=-1.0, k0=1.0, mix=(0.5, 0.5, 0.5, 0.5))
    traj = evolve(psi0, harmonic, cfg, sample_every=100)
    norms = np.array([norm(s) for s in traj.states])
    assert len(traj) == 11
    assert np.max(np.abs(norms - norms[0])) / norms[0] < 1e-8


def test_absorber_drains_norm(grid, absorber, cfg):
    traj = evolve(gaussian(grid, center=1.0), absorber, cfg, sample_every=20)
    norms = np.array([norm(s) for s in traj.states])
    assert np.all(np.diff(norms) < 0.0)


@pytest.mark.parametrize("variant", list(Variant))
def test_plane_wave_phase(variant):
    grid = GridSpec(n=64, length=2.0 * np.pi)
    cfg = SimulationConfig(dt=1e-4, steps=4000, variant=variant)
    z = np.exp(1j * grid.wavenumber(20) * grid.x)
    traj = evolve(QField.from_complex(grid, z), PotentialSpec.free(grid), cfg, sample_every=4000)
    E = dispersion(grid, 20, cfg)
    exact = z * np.exp(-1j * E * cfg.total_time / cfg.hbar)
    error = np.max(np.abs(traj.final.values[:, 0] + 1j * traj.final.values[:, 1] - exact))
    assert error <= 1e-6


def test_zero_state_stays_zero(grid, harmonic, cfg):
    traj = evolve(QField.zeros(grid), harmonic, cfg, sample_every=10)
    assert all(not np.any(state.values) for state in traj.states)


def test_blow_up_raises(grid, harmonic):
    cfg = SimulationConfig(dt=1.0, steps=500)
    with np.errstate(all="ignore"), pytest.raises(NaNDetectedError) as info:
        evolve(gaussian(grid), harmonic, cfg)
    assert info.value.step > 1


def test_step_rk4_matches_evolve(grid, harmonic, cfg):
    psi0 = gaussian(grid, k0=1.0)
    one = cfg.model_copy(update={"steps": 1})
    np.testing.assert_array_equal(step_rk4(psi0, harmonic, cfg).values, evolve(psi0, harmonic, one).final.values)


def test_stability_bound_is_advisory(grid):
    assert check_stability(grid, SimulationConfig(dt=1e-4))
    assert not check_stability(grid, SimulationConfig(dt=1e-1))


def test_grid_mismatch(grid, harmonic, cfg):
    other = GridSpec(n=grid.n // 2, length=grid.length)
    with pytest.raises(GridMismatchError):
        apply_H(QField.zeros(other), harmonic, cfg)


def test_trajectory_times_strictly_increase(grid):
    traj = Trajectory(grid=grid)
    traj.append(0.0, QField.zeros(grid))
    with pytest.raises(ValueError):
        traj.append(0.0, QField.zeros(grid))


def test_hermiticity_defect_of_constant_imaginary_potential(grid, cfg, rng):
    gamma = 0.4
    pot = PotentialSpec.build(grid, V0=1j * gamma)
    f, g = (complex_part(random_field(grid, rng)) for _ in range(2))
    expected = 2.0 * gamma * left_i(inner_product(f, g).components)
    assert hermiticity_defect(pot, cfg, f, g).isclose(Quaternion.from_components(expected), atol=1e-10)


def test_hermitian_hamiltonians_have_no_defect(grid, cfg):
    x = grid.x
    pot = PotentialSpec.build(grid, alpha=0.3 * np.exp(-(x ** 2) / 2.0), V0=0.5 * x ** 2)
    assert max_hermiticity_defect(pot, cfg) < 1e-12
    assert max_hermiticity_defect(PotentialSpec.build(grid, V0=0.5 * x ** 2), cfg.with_variant(Variant.RCWE)) < 1e-12


def test_quaternionic_scalar_potential_is_not_hermitian(grid, cfg):
    pot = PotentialSpec.build(grid, V0=0.5 * grid.x ** 2, V1=0.3)
    assert max_hermiticity_defect(pot, cfg) > 1e-6


@pytest.mark.parametrize("variant", list(Variant))
def test_hamiltonian_is_linear(grid, rng, variant):
    scalar = random_potential(grid, rng)
    x = grid.x
    pot = PotentialSpec.build(
        grid, alpha=0.2 * np.cos(x), beta=0.1 - 0.05j, V0=scalar.V0, V1=scalar.V1
    )
    cfg = SimulationConfig(variant=variant)
    f, g = random_field(grid, rng), random_field(grid, rng)
    a, b = 0.7, -1.3
    combined = apply_H(f.scale(a) + g.scale(b), pot, cfg).values
    expected = a * apply_H(f, pot, cfg).values + b * apply_H(g, pot, cfg).values
    np.testing.assert_allclose(combined, expected, atol=1e-10)
