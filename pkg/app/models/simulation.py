from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from app.core.config import settings


class Variant(str, Enum):
    LCWE = "lcwe"
    RCWE = "rcwe"


class GridSpec(BaseModel):
    """Periodic 1-D grid with points x_m = -L/2 + m*dx."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=8)
    length: float = Field(gt=0.0)

    @computed_field
    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + np.arange(self.n) * self.dx

    def wavenumber(self, k_index: int) -> float:
        return 2.0 * np.pi * k_index / self.length


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    hbar: float = Field(default_factory=lambda: settings.HBAR, gt=0.0)
    mass: float = Field(default_factory=lambda: settings.MASS, gt=0.0)
    dt: float = Field(default=1e-4, gt=0.0)
    steps: int = Field(default=100, ge=1)
    variant: Variant = Variant.LCWE
    safety_factor: float = Field(default_factory=lambda: settings.STABILITY_SAFETY, gt=0.0)

    @field_validator("variant", mode="before")
    @classmethod
    def lower_variant(cls, value):
        return value.lower() if isinstance(value, str) else value

    @property
    def total_time(self) -> float:
        return self.dt * self.steps

    def stability_limit(self, grid: GridSpec) -> float:
        return self.safety_factor * grid.dx ** 2 * self.mass / self.hbar

    def with_variant(self, variant: Variant) -> "SimulationConfig":
        return self.model_copy(update={"variant": variant})
