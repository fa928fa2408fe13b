from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.simulation import Variant


class ObservableSample(BaseModel):
    time: float
    name: str
    value: float

    @field_validator("value")
    @classmethod
    def finite_value(cls, value: float) -> float:
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"observable value must be finite, got {value}")
        return value


class ResidualReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    identity: str
    variant: Variant
    grid_n: int
    dx: float
    dt: float
    max_residual: float = Field(ge=0.0)
    l2_residual: float = Field(ge=0.0)
    tolerance: float
    passed: bool = Field(alias="pass")
    details: List[float] = Field(default_factory=list)
    note: Optional[str] = None
    # pass conditions that no tolerance rescale can satisfy (refusals, leakage)
    conditions_met: bool = True

    @field_validator("max_residual", "l2_residual")
    @classmethod
    def finite_residual(cls, value: float) -> float:
        if value != value or value == float("inf"):
            raise ValueError("residuals must be finite")
        return value

    def to_json_row(self) -> dict:
        return {
            "identity": self.identity,
            "variant": self.variant.value,
            "grid_n": self.grid_n,
            "dt": self.dt,
            "max_residual": self.max_residual,
            "l2_residual": self.l2_residual,
            "pass": self.passed,
            "tolerance": self.tolerance,
        }

    def rescaled(self, tol_scale: float) -> "ResidualReport":
        tolerance = self.tolerance * tol_scale
        passed = self.conditions_met and self.max_residual <= tolerance
        return self.model_copy(update={"tolerance": tolerance, "passed": passed})


class FitParameter(str, Enum):
    DX = "dx"
    DT = "dt"


class ConvergenceFit(BaseModel):
    parameter: FitParameter
    samples: List[Tuple[float, float]]
    fitted_order: float

    @model_validator(mode="after")
    def check_samples(self) -> "ConvergenceFit":
        if len(self.samples) < 3:
            raise ValueError("a convergence fit needs at least 3 samples")
        values = [value for value, _ in self.samples]
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError("parameter values must be strictly decreasing")
        return self

    def within(self, expected: float, slack: float) -> bool:
        return abs(self.fitted_order - expected) <= slack
