"""
Vector potential Q = alpha*i + beta*j and scalar potential V = V0 + V1*j on a grid.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.core.exceptions import GridMismatchError
from app.models.simulation import GridSpec
from app.services.grid import QField


def _real(grid: GridSpec, values) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(values, dtype=np.float64), (grid.n,)).copy()
    arr.setflags(write=False)
    return arr


def _complex(grid: GridSpec, values) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(values, dtype=np.complex128), (grid.n,)).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    grid: GridSpec
    alpha: np.ndarray
    beta: np.ndarray
    V0: np.ndarray
    V1: np.ndarray
    _Q: Optional[QField] = field(default=None, repr=False, compare=False)
    _V: Optional[QField] = field(default=None, repr=False, compare=False)

    @classmethod
    def build(cls, grid: GridSpec, alpha=0.0, beta=0.0, V0=0.0, V1=0.0) -> "PotentialSpec":
        alpha_arr = np.asarray(alpha)
        if np.iscomplexobj(alpha_arr) and np.any(alpha_arr.imag != 0):
            raise ValueError("alpha must be real")
        return cls(
            grid=grid,
            alpha=_real(grid, np.real(alpha_arr)),
            beta=_complex(grid, beta),
            V0=_complex(grid, V0),
            V1=_complex(grid, V1),
        )

    @classmethod
    def free(cls, grid: GridSpec) -> "PotentialSpec":
        return cls.build(grid)

    @property
    def Q(self) -> QField:
        """alpha*i + beta*j as a field with zero real part."""
        if self._Q is None:
            values = np.stack(
                [np.zeros(self.grid.n), self.alpha, self.beta.real, self.beta.imag], axis=-1
            )
            object.__setattr__(self, "_Q", QField(self.grid, values))
        return self._Q

    @property
    def V(self) -> QField:
        if self._V is None:
            object.__setattr__(self, "_V", QField.from_complex(self.grid, self.V0, self.V1))
        return self._V

    @property
    def has_vector_potential(self) -> bool:
        return bool(np.any(self.alpha != 0) or np.any(self.beta != 0))

    @property
    def is_real_scalar(self) -> bool:
        """V is a real scalar field (Im V0 = 0 and V1 = 0)."""
        return bool(np.all(self.V0.imag == 0) and np.all(self.V1 == 0))

    @property
    def is_complex_reducible(self) -> bool:
        """beta = 0 and V1 = 0: the complex subspace is invariant."""
        return bool(np.all(self.beta == 0) and np.all(self.V1 == 0))

    def check_grid(self, f: QField) -> None:
        if f.grid != self.grid:
            raise GridMismatchError(f"potential grid {self.grid} vs field grid {f.grid}")

    def with_V0(self, V0) -> "PotentialSpec":
        return PotentialSpec.build(self.grid, self.alpha, self.beta, V0, self.V1)
