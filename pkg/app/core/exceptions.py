# app/core/exceptions.py
from typing import Optional


class QQMError(Exception):
    """Base class for every error raised by the harness."""


class GridMismatchError(QQMError):
    """Two fields (or a field and a potential) live on different grids."""


class MalformedOperatorError(QQMError):
    """An OperatorSpec tree contains an unknown or ill-formed node."""


class NaNDetectedError(QQMError):
    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"non-finite value in state at step {step}")


class TooFewSamplesError(QQMError):
    """A trajectory is too short for centered time differencing."""


class NonHermitianError(QQMError):
    def __init__(self, defect: float):
        self.defect = defect
        super().__init__(f"Hamiltonian is not hermitian on sampled pairs (defect {defect:.3e})")


class DegenerateVariationError(QQMError):
    """Convergence reports do not vary exactly one discretization parameter."""


class PreconditionError(QQMError):
    """A check was called outside its domain (e.g. Q != 0 for canonical momentum)."""


class ImaginaryResidueError(QQMError):
    def __init__(self, residue: float, tolerance: float):
        self.residue = residue
        super().__init__(
            f"expectation value kept an imaginary residue {residue:.3e} > {tolerance:.1e}"
        )


class ScenarioError(QQMError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
