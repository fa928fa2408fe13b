"""
Composable quaternionic operators.

An OperatorSpec is a small tree evaluated recursively by apply_operator.
Coefficient fields multiply from the left of the wave function; right
multiplication exists only through RightI, the (O|i) notation.
Products of operators are compositions: Compose(A, B) is A(B(psi)).
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from app.core.exceptions import GridMismatchError, MalformedOperatorError
from app.models.simulation import GridSpec, Variant
from app.services.grid import QField, gradient
from app.services.quaternion import I, J, K, Quaternion, hamilton_product, left_i, right_i


class OperatorSpec:
    """Base class of operator tree nodes."""

    def __add__(self, other: "OperatorSpec") -> "OperatorSpec":
        return Sum((self, other))

    def __sub__(self, other: "OperatorSpec") -> "OperatorSpec":
        return Sum((self, Scale(-1.0, other)))

    def __matmul__(self, other: "OperatorSpec") -> "OperatorSpec":
        return Compose(self, other)

    def __rmul__(self, factor: float) -> "OperatorSpec":
        return Scale(float(factor), self)


@dataclass(frozen=True, eq=False)
class Identity(OperatorSpec):
    pass


@dataclass(frozen=True, eq=False)
class MultiplyByField(OperatorSpec):
    coefficient: QField


@dataclass(frozen=True, eq=False)
class Position(OperatorSpec):
    pass


@dataclass(frozen=True, eq=False)
class Derivative(OperatorSpec):
    """d/dx by the central stencil; canonical=True gives -i*hbar*d/dx."""
    canonical: bool = False
    hbar: float = 1.0


@dataclass(frozen=True, eq=False)
class LeftI(OperatorSpec):
    sub: OperatorSpec


@dataclass(frozen=True, eq=False)
class RightI(OperatorSpec):
    sub: OperatorSpec


@dataclass(frozen=True, eq=False)
class Compose(OperatorSpec):
    outer: OperatorSpec
    inner: OperatorSpec


@dataclass(frozen=True, eq=False)
class Sum(OperatorSpec):
    terms: Tuple[OperatorSpec, ...]


@dataclass(frozen=True, eq=False)
class Scale(OperatorSpec):
    factor: float
    sub: OperatorSpec


def apply_operator(op: OperatorSpec, f: QField) -> QField:
    """Evaluate the operator tree on f."""
    if isinstance(op, Identity):
        return f
    if isinstance(op, MultiplyByField):
        if not isinstance(op.coefficient, QField):
            raise MalformedOperatorError("MultiplyByField needs a QField coefficient")
        if op.coefficient.grid != f.grid:
            raise GridMismatchError(f"coefficient grid {op.coefficient.grid} vs field grid {f.grid}")
        return QField(f.grid, hamilton_product(op.coefficient.values, f.values))
    if isinstance(op, Position):
        return QField(f.grid, f.grid.x[:, None] * f.values)
    if isinstance(op, Derivative):
        df = gradient(f)
        if op.canonical:
            return QField(f.grid, -op.hbar * left_i(df.values))
        return df
    if isinstance(op, LeftI):
        return QField(f.grid, left_i(apply_operator(op.sub, f).values))
    if isinstance(op, RightI):
        return QField(f.grid, right_i(apply_operator(op.sub, f).values))
    if isinstance(op, Compose):
        return apply_operator(op.outer, apply_operator(op.inner, f))
    if isinstance(op, Sum):
        if not op.terms:
            raise MalformedOperatorError("Sum needs at least one term")
        total = np.zeros_like(f.values)
        for term in op.terms:
            total = total + apply_operator(term, f).values
        return QField(f.grid, total)
    if isinstance(op, Scale):
        if not np.isfinite(op.factor):
            raise MalformedOperatorError(f"Scale factor must be finite, got {op.factor}")
        return QField(f.grid, op.factor * apply_operator(op.sub, f).values)
    raise MalformedOperatorError(f"unknown operator node: {op!r}")


# Library of named operators

def identity() -> OperatorSpec:
    return Identity()


def position() -> OperatorSpec:
    return Position()


def multiplier(grid: GridSpec, q: Union[Quaternion, QField]) -> OperatorSpec:
    if isinstance(q, Quaternion):
        q = QField.constant(grid, q)
    return MultiplyByField(q)


def momentum(variant: Variant, hbar: float) -> OperatorSpec:
    """Canonical momentum: -i*hbar*d/dx (LCWE) or -hbar*(d/dx | i) (RCWE)."""
    if variant == Variant.LCWE:
        return Derivative(canonical=True, hbar=hbar)
    return Scale(-hbar, RightI(Derivative()))


def force(V: QField) -> OperatorSpec:
    """-[d/dx, V], the lattice counterpart of multiplication by -dV/dx."""
    d, v = Derivative(), MultiplyByField(V)
    return Scale(-1.0, Compose(d, v) - Compose(v, d))


def potential_times_derivative(V: QField) -> OperatorSpec:
    """-V d/dx."""
    return Scale(-1.0, Compose(MultiplyByField(V), Derivative()))


def breakdown_operator(V: QField, variant: Variant) -> OperatorSpec:
    """i*V*x (LCWE) or (V*x | i) (RCWE)."""
    vx = Compose(MultiplyByField(V), Position())
    if variant == Variant.LCWE:
        return LeftI(vx)
    return RightI(vx)


def left_unit() -> OperatorSpec:
    """The operator psi -> i*psi."""
    return LeftI(Identity())


def i_sandwich(op: OperatorSpec) -> OperatorSpec:
    """i O i as a composition."""
    return LeftI(Compose(op, left_unit()))


def combinations(op: OperatorSpec) -> dict:
    """The four LCWE combinations O - iOi, Oi + iO, O + iOi, Oi - iO."""
    o_i = Compose(op, left_unit())
    i_o = LeftI(op)
    ioi = i_sandwich(op)
    return {
        "o_minus_ioi": op - ioi,
        "oi_plus_io": o_i + i_o,
        "o_plus_ioi": op + ioi,
        "oi_minus_io": o_i - i_o,
    }


def named_operator(name: str, grid: GridSpec, variant: Variant, hbar: float) -> OperatorSpec:
    """Resolve an operator name used in scenario files."""
    library = {
        "identity": identity,
        "position": position,
        "momentum": lambda: momentum(variant, hbar),
        "i": lambda: multiplier(grid, I),
        "j": lambda: multiplier(grid, J),
        "k": lambda: multiplier(grid, K),
        "i_position": lambda: LeftI(Position()),
        "j_position": lambda: Compose(multiplier(grid, J), Position()),
    }
    try:
        return library[name]()
    except KeyError:
        raise MalformedOperatorError(
            f"unknown operator name '{name}'; known: {', '.join(sorted(library))}"
        ) from None


OPERATOR_NAMES = ("identity", "position", "momentum", "i", "j", "k", "i_position", "j_position")
