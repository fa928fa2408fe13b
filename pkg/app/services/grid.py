"""
Quaternion-valued fields on a periodic 1-D grid.

Finite differences are second-order central stencils with periodic
wraparound; quadrature is the plain Riemann sum, which coincides with the
trapezoid rule under periodicity.
"""

import csv
from pathlib import Path
from typing import Callable, Union

import numpy as np

from app.core.exceptions import GridMismatchError, QQMError
from app.core.files import atomic_writer
from app.models.simulation import GridSpec
from app.services.quaternion import Quaternion, conjugate, hamilton_product, norm_sq


class QField:
    """Immutable field of n quaternions, stored as an (n, 4) float64 array."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.array(values, dtype=np.float64, copy=True)
        if values.shape != (grid.n, 4):
            raise GridMismatchError(
                f"field of shape {values.shape} does not fit a grid of {grid.n} points"
            )
        if not np.all(np.isfinite(values)):
            raise QQMError("field contains non-finite components")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: GridSpec) -> "QField":
        return cls(grid, np.zeros((grid.n, 4)))

    @classmethod
    def constant(cls, grid: GridSpec, q: Quaternion) -> "QField":
        return cls(grid, np.tile(q.components, (grid.n, 1)))

    @classmethod
    def from_complex(cls, grid: GridSpec, z: np.ndarray, zeta: Union[np.ndarray, None] = None) -> "QField":
        """Build z + zeta*j from complex samples."""
        z = np.broadcast_to(np.asarray(z, dtype=np.complex128), (grid.n,))
        zeta = np.zeros(grid.n, dtype=np.complex128) if zeta is None else np.broadcast_to(
            np.asarray(zeta, dtype=np.complex128), (grid.n,)
        )
        values = np.stack([z.real, z.imag, zeta.real, zeta.imag], axis=-1)
        return cls(grid, values)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> "QField":
        return cls(grid, fn(grid.x))

    def at(self, m: int) -> Quaternion:
        return Quaternion.from_components(self.values[m])

    def same_grid(self, other: "QField") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other: "QField") -> "QField":
        self.same_grid(other)
        return QField(self.grid, self.values + other.values)

    def __sub__(self, other: "QField") -> "QField":
        self.same_grid(other)
        return QField(self.grid, self.values - other.values)

    def scale(self, a: float) -> "QField":
        return QField(self.grid, a * self.values)

    def __mul__(self, other: "QField") -> "QField":
        """Pointwise Hamilton product self*other."""
        self.same_grid(other)
        return QField(self.grid, hamilton_product(self.values, other.values))

    def conj(self) -> "QField":
        return QField(self.grid, conjugate(self.values))

    def norm_sq(self) -> np.ndarray:
        return norm_sq(self.values)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.norm_sq()) * self.grid.dx))

    def shift(self, k: int) -> "QField":
        return QField(self.grid, np.roll(self.values, k, axis=0))

    def is_complex(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values[:, 2:]) <= atol))

    def __repr__(self) -> str:
        return f"QField(n={self.grid.n}, length={self.grid.length})"


def gradient(f: QField) -> QField:
    """Central difference (f[m+1] - f[m-1]) / (2 dx), periodic."""
    v = f.values
    return QField(f.grid, (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * f.grid.dx))


def laplacian(f: QField) -> QField:
    """(f[m+1] - 2 f[m] + f[m-1]) / dx^2, periodic."""
    v = f.values
    return QField(
        f.grid,
        (np.roll(v, -1, axis=0) - 2.0 * v + np.roll(v, 1, axis=0)) / f.grid.dx ** 2,
    )


def inner_product(f: QField, g: QField) -> Quaternion:
    """sum_m conj(f[m]) g[m] dx."""
    f.same_grid(g)
    total = np.sum(hamilton_product(conjugate(f.values), g.values), axis=0) * f.grid.dx
    return Quaternion.from_components(total)


def integrate(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(values) * grid.dx)


def write_field_csv(path: Path, field: QField) -> None:
    """Dump a field as rows x, x0, x1, x2, x3; written atomically."""
    with atomic_writer(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "x0", "x1", "x2", "x3"])
        for x, q in zip(field.grid.x, field.values):
            writer.writerow([repr(float(x))] + [repr(float(c)) for c in q])


def read_field_csv(path: Path, grid: GridSpec) -> QField:
    """Read a dump written by write_field_csv."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    values = np.array([[float(r[c]) for c in ("x0", "x1", "x2", "x3")] for r in rows[: grid.n]])
    return QField(grid, values)
