import numpy as np
import pytest

from app.models.simulation import GridSpec, SimulationConfig, Variant
from app.services.grid import QField
from app.services.potential import PotentialSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid():
    return GridSpec(n=256, length=20.0)


@pytest.fixture
def small_grid():
    return GridSpec(n=64, length=2.0 * np.pi)


@pytest.fixture
def cfg():
    return SimulationConfig(dt=1e-4, steps=100, variant=Variant.LCWE)


@pytest.fixture
def rcwe_cfg(cfg):
    return cfg.with_variant(Variant.RCWE)


def gaussian(grid, center=0.0, width=1.0, k0=0.0, mix=(1.0, 0.0, 0.0, 0.0)) -> QField:
    """Unit-norm packet profile * (c0 + c1 i + c2 j + c3 k)."""
    x = grid.x
    z = np.exp(-((x - center) ** 2) / (4.0 * width ** 2) + 1j * k0 * x)
    z = z / np.sqrt(np.sum(np.abs(z) ** 2) * grid.dx)
    return QField.from_complex(grid, z * complex(mix[0], mix[1]), z * complex(mix[2], mix[3]))


def random_field(grid, rng, smooth: bool = True) -> QField:
    """Random quaternionic field; smooth fields are sums of low Fourier modes under a Gaussian envelope."""
    if not smooth:
        return QField(grid, rng.normal(size=(grid.n, 4)))
    x = grid.x
    values = np.zeros((grid.n, 4))
    for mode in range(1, 4):
        phase = rng.uniform(0.0, 2.0 * np.pi, size=4)
        values += rng.normal(size=4) * np.cos(grid.wavenumber(mode) * x[:, None] + phase)
    envelope = np.exp(-(x ** 2) / 8.0)[:, None]
    return QField(grid, values * envelope)


def random_potential(grid, rng) -> PotentialSpec:
    """Complex V0 and V1 built from a random bump over a weak confining well."""
    x = grid.x
    bump = np.exp(-(x ** 2) / 4.0)
    V0 = rng.normal() * bump + 0.1 * x ** 2 + 1j * rng.normal() * bump
    V1 = complex(rng.normal(), rng.normal()) * bump
    return PotentialSpec.build(grid, V0=V0, V1=V1)


@pytest.fixture
def packet(grid):
    return gaussian(grid, center=-1.0, width=1.0, k0=1.0)


@pytest.fixture
def harmonic(grid):
    return PotentialSpec.build(grid, V0=0.5 * grid.x ** 2)


@pytest.fixture
def absorber(grid):
    x = grid.x
    return PotentialSpec.build(grid, V0=-0.5j * np.exp(-((x - 2.0) ** 2) / (2.0 * 1.5 ** 2)))
