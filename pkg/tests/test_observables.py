import numpy as np
import pytest

from app.core.exceptions import ImaginaryResidueError
from app.models.simulation import GridSpec, SimulationConfig, Variant
from app.services.dynamics import evolve
from app.services.grid import QField
from app.services.observables import (
    breakdown_term,
    canonical_momentum,
    current,
    density,
    expectation,
    field_expectation,
    norm,
    real_part_of_pair,
    sample_observables,
    source,
    source_integral,
)
from app.services.operators import Position, apply_operator, momentum, multiplier
from app.services.potential import PotentialSpec
from app.services.quaternion import J, ONE, Quaternion, conjugate, hamilton_product

from tests.conftest import gaussian, random_field, random_potential


def test_density_of_mixed_constant(grid):
    psi = QField.constant(grid, Quaternion(1.0, 0.0, 1.0, 0.0) * (1.0 / np.sqrt(2.0)))
    np.testing.assert_allclose(density(psi), 1.0)


def test_gaussian_is_normalised(grid):
    assert norm(gaussian(grid, center=0.5, width=0.8, k0=2.0, mix=(0.5, 0.5, 0.5, 0.5))) == pytest.approx(1.0)


@pytest.mark.parametrize("variant", list(Variant))
def test_source_closed_form(grid, variant):
    x = grid.x
    im_v0 = -0.4 * np.exp(-((x - 1.0) ** 2))
    pot = PotentialSpec.build(grid, V0=0.5 * x ** 2 + 1j * im_v0)
    cfg = SimulationConfig(variant=variant, hbar=0.9)
    mix = (0.6, 0.8, 0.0, 0.0) if variant == Variant.RCWE else (0.5, 0.5, 0.5, 0.5)
    psi = gaussian(grid, center=0.5, k0=1.0, mix=mix)
    np.testing.assert_allclose(source(psi, pot, cfg), 2.0 * im_v0 * density(psi) / cfg.hbar, atol=1e-14)


def test_lcwe_source_closed_form_on_random_draws(grid, cfg, rng):
    for _ in range(5):
        pot = random_potential(grid, rng)
        psi = random_field(grid, rng)
        expected = 2.0 * pot.V0.imag * density(psi) / cfg.hbar
        np.testing.assert_allclose(source(psi, pot, cfg), expected, rtol=1e-12, atol=1e-12)


def test_lcwe_source_ignores_quaternionic_part_of_v(grid, cfg):
    x = grid.x
    pot = PotentialSpec.build(grid, V0=-0.2j, V1=0.3 + 0.1j * x)
    psi = gaussian(grid, mix=(0.8, 0.0, 0.6, 0.0))
    np.testing.assert_allclose(source(psi, pot, cfg), -0.4 * density(psi), atol=1e-14)


def test_source_vanishes_for_real_potential(grid, harmonic, cfg):
    psi = gaussian(grid, k0=1.0, mix=(0.5, 0.5, 0.5, 0.5))
    assert source_integral(psi, harmonic, cfg) == 0.0


@pytest.mark.parametrize("variant", list(Variant))
def test_plane_wave_current_and_momentum(variant):
    grid = GridSpec(n=64, length=2.0 * np.pi)
    cfg = SimulationConfig(variant=variant, hbar=1.1, mass=0.7)
    k = grid.wavenumber(4)
    psi = QField.from_complex(grid, np.exp(1j * k * grid.x) / np.sqrt(grid.length))
    velocity = cfg.hbar * np.sin(k * grid.dx) / (grid.dx * cfg.mass)
    pot = PotentialSpec.free(grid)

    np.testing.assert_allclose(current(psi, pot, cfg), velocity * density(psi), atol=1e-13)
    assert canonical_momentum(psi, pot, cfg) == pytest.approx(cfg.mass * velocity)
    assert expectation(momentum(variant, cfg.hbar), psi, variant) == pytest.approx(cfg.mass * velocity)


def test_real_gaussian_carries_no_momentum(grid, harmonic, cfg):
    psi = gaussian(grid, center=0.7)
    assert canonical_momentum(psi, harmonic, cfg) == pytest.approx(0.0, abs=1e-14)


def test_current_is_real_for_quaternionic_states(grid, cfg):
    x = grid.x
    pot = PotentialSpec.build(grid, alpha=0.2 * np.sin(x), beta=0.1 + 0.05j, V0=0.5 * x ** 2)
    psi = gaussian(grid, k0=1.5, mix=(0.5, -0.5, 0.5, 0.5))
    for variant in Variant:
        J_x = current(psi, pot, cfg, variant)
        assert J_x.shape == (grid.n,)
        assert np.all(np.isfinite(J_x))


def test_expectations_are_real(grid, cfg):
    psi = gaussian(grid, center=1.0, k0=0.5, mix=(0.5, 0.5, 0.5, 0.5))
    for variant in Variant:
        assert expectation(multiplier(grid, ONE), psi, variant) == pytest.approx(1.0)
        assert expectation(Position(), psi, variant) == pytest.approx(1.0, abs=1e-10)
        assert isinstance(expectation(multiplier(grid, J), psi, variant), float)


def test_field_expectation_matches_operator_form(grid, cfg):
    psi = gaussian(grid, center=-0.5, k0=1.0, mix=(0.6, 0.0, 0.0, 0.8))
    op = momentum(Variant.LCWE, cfg.hbar)
    chi = apply_operator(op, psi)
    assert field_expectation(psi, chi, Variant.LCWE) == pytest.approx(expectation(op, psi, Variant.LCWE))


@pytest.mark.parametrize("variant", list(Variant))
def test_breakdown_term_for_constant_absorber(grid, variant):
    gamma = 0.3
    cfg = SimulationConfig(variant=variant)
    pot = PotentialSpec.build(grid, V0=1j * gamma)
    psi = gaussian(grid, center=1.5)
    assert breakdown_term(psi, pot, cfg) == pytest.approx(-2.0 * gamma * 1.5 / cfg.hbar, rel=1e-9)


def test_sample_observables_rows(grid, harmonic, cfg):
    cfg = cfg.model_copy(update={"steps": 20})
    traj = evolve(gaussian(grid, k0=1.0), harmonic, cfg, sample_every=10)
    rows = sample_observables(traj, harmonic, cfg, ["position", "j"])
    names = [row.name for row in rows[:7]]
    assert names == [
        "norm",
        "source_integral",
        "max_abs_source",
        "canonical_momentum",
        "breakdown_term",
        "<position>",
        "<j>",
    ]
    assert len(rows) == 7 * len(traj)
    assert rows[0].value == pytest.approx(1.0)
    assert [row.time for row in rows[::7]] == traj.times


def test_wrongly_ordered_pair_keeps_imaginary_residue(grid, rng):
    psi = random_field(grid, rng)
    chi = apply_operator(multiplier(grid, J), psi)
    dx = grid.dx
    first = np.sum(hamilton_product(conjugate(psi.values), chi.values), axis=0) * dx
    second = np.sum(hamilton_product(conjugate(chi.values), psi.values), axis=0) * dx
    swapped = np.sum(hamilton_product(psi.values, conjugate(chi.values)), axis=0) * dx

    expected = expectation(multiplier(grid, J), psi, Variant.LCWE)
    assert real_part_of_pair(first, second) == pytest.approx(expected)
    with pytest.raises(ImaginaryResidueError):
        real_part_of_pair(first, swapped)
