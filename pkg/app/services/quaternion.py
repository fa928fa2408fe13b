"""
Quaternion algebra with the basis convention ij = -ji = k, ijk = -1.

Values are stored as four float64 components (x0, x1, x2, x3) for
q = x0 + x1 i + x2 j + x3 k. The array kernels work on any array whose
last axis has length 4, so the same code path serves a single value and a
whole field of grid samples.
"""

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

Number = Union[int, float]


def as_components(q) -> np.ndarray:
    """Return the (..., 4) float64 component array of q."""
    if isinstance(q, Quaternion):
        return q.components
    return np.asarray(q, dtype=np.float64)


def hamilton_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Componentwise Hamilton product p*q over the last axis."""
    p0, p1, p2, p3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    q0, q1, q2, q3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape), dtype=np.float64)
    out[..., 0] = p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3
    out[..., 1] = p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2
    out[..., 2] = p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1
    out[..., 3] = p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0
    return out


def conjugate(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=np.float64, copy=True)
    out[..., 1:] = -out[..., 1:]
    return out


def norm_sq(q: np.ndarray) -> np.ndarray:
    return np.sum(q * q, axis=-1)


def real_part(q: np.ndarray) -> np.ndarray:
    return q[..., 0]


def imag_residue(q: np.ndarray) -> float:
    """Largest absolute imaginary component; 0.0 for real-valued input."""
    q = np.asarray(q)
    if q[..., 1:].size == 0:
        return 0.0
    return float(np.max(np.abs(q[..., 1:])))


def left_i(q: np.ndarray) -> np.ndarray:
    """i*q without a general product: (x0,x1,x2,x3) -> (-x1, x0, -x3, x2)."""
    out = np.empty_like(q, dtype=np.float64)
    out[..., 0] = -q[..., 1]
    out[..., 1] = q[..., 0]
    out[..., 2] = -q[..., 3]
    out[..., 3] = q[..., 2]
    return out


def right_i(q: np.ndarray) -> np.ndarray:
    """q*i: (x0,x1,x2,x3) -> (-x1, x0, x3, -x2)."""
    out = np.empty_like(q, dtype=np.float64)
    out[..., 0] = -q[..., 1]
    out[..., 1] = q[..., 0]
    out[..., 2] = q[..., 3]
    out[..., 3] = -q[..., 2]
    return out


def left_matrix(q: np.ndarray) -> np.ndarray:
    """4x4 real matrix L(q) with L(q) @ p == q*p."""
    x0, x1, x2, x3 = (float(c) for c in as_components(q))
    return np.array(
        [
            [x0, -x1, -x2, -x3],
            [x1, x0, -x3, x2],
            [x2, x3, x0, -x1],
            [x3, -x2, x1, x0],
        ]
    )


def from_complex_pair(z: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Components of z + zeta*j for complex arrays z and zeta."""
    z = np.asarray(z, dtype=np.complex128)
    zeta = np.asarray(zeta, dtype=np.complex128)
    out = np.empty(np.broadcast_shapes(z.shape, zeta.shape) + (4,), dtype=np.float64)
    out[..., 0] = z.real
    out[..., 1] = z.imag
    out[..., 2] = zeta.real
    out[..., 3] = zeta.imag
    return out


@dataclass(frozen=True)
class SymplecticPair:
    z: complex
    zeta: complex


@dataclass(frozen=True)
class Quaternion:
    x0: float = 0.0
    x1: float = 0.0
    x2: float = 0.0
    x3: float = 0.0

    @classmethod
    def from_components(cls, components: Iterable[Number]) -> "Quaternion":
        x0, x1, x2, x3 = (float(c) for c in components)
        return cls(x0, x1, x2, x3)

    @property
    def components(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2, self.x3], dtype=np.float64)

    def __mul__(self, other) -> "Quaternion":
        if isinstance(other, (int, float)):
            return Quaternion.from_components(self.components * other)
        return qmul(self, other)

    def __rmul__(self, other) -> "Quaternion":
        if isinstance(other, (int, float)):
            return Quaternion.from_components(self.components * other)
        return NotImplemented

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_components(self.components + other.components)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_components(self.components - other.components)

    def __neg__(self) -> "Quaternion":
        return Quaternion.from_components(-self.components)

    def norm_sq(self) -> float:
        return float(norm_sq(self.components))

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.components - other.components) <= atol))

    def __repr__(self) -> str:
        return f"Quaternion({self.x0!r}, {self.x1!r}, {self.x2!r}, {self.x3!r})"


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion.from_components(hamilton_product(a.components, b.components))


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.x0, -q.x1, -q.x2, -q.x3)


def to_symplectic(q: Quaternion) -> SymplecticPair:
    return SymplecticPair(z=complex(q.x0, q.x1), zeta=complex(q.x2, q.x3))


def from_symplectic(p: SymplecticPair) -> Quaternion:
    return Quaternion(p.z.real, p.z.imag, p.zeta.real, p.zeta.imag)


def commutator_i(q: Quaternion) -> Quaternion:
    """i*q - q*i."""
    c = q.components
    return Quaternion.from_components(left_i(c) - right_i(c))


def anticommutator_i(q: Quaternion) -> Quaternion:
    """i*q + q*i."""
    c = q.components
    return Quaternion.from_components(left_i(c) + right_i(c))
