from typing import Annotated, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.simulation import Variant

CheckName = Literal[
    "continuity",
    "ehrenfest_position",
    "ehrenfest_momentum",
    "hermitian_identities",
    "evolution_identities",
    "stationarity",
    "oracle_compare",
]

# Reports a selected check emits; each may carry its own tolerance override.
CHECK_REPORTS: Dict[str, tuple] = {
    "continuity": ("continuity", "global_balance"),
    "ehrenfest_position": ("ehrenfest_position", "breakdown_identity"),
    "ehrenfest_momentum": ("ehrenfest_momentum", "momentum_forms"),
    "hermitian_identities": ("hermitian_identities",),
    "evolution_identities": ("evolution_identities",),
    "stationarity": ("stationarity",),
    "oracle_compare": ("oracle_compare",),
}

_STRICT = ConfigDict(extra="forbid", frozen=True)


class ZeroProfile(BaseModel):
    model_config = _STRICT
    family: Literal["zero"]

    def evaluate(self, x: np.ndarray, mass: float) -> np.ndarray:
        return np.zeros_like(x)


class ConstantProfile(BaseModel):
    model_config = _STRICT
    family: Literal["constant"]
    value: float

    def evaluate(self, x: np.ndarray, mass: float) -> np.ndarray:
        return np.full_like(x, self.value)


class HarmonicProfile(BaseModel):
    """0.5 * m * omega^2 * (x - center)^2"""
    model_config = _STRICT
    family: Literal["harmonic"]
    omega: float = Field(ge=0.0)
    center: float = 0.0

    def evaluate(self, x: np.ndarray, mass: float) -> np.ndarray:
        return 0.5 * mass * self.omega ** 2 * (x - self.center) ** 2


class GaussianProfile(BaseModel):
    """height * exp(-(x - center)^2 / (2 width^2))"""
    model_config = _STRICT
    family: Literal["gaussian"]
    height: float
    center: float = 0.0
    width: float = Field(gt=0.0)

    def evaluate(self, x: np.ndarray, mass: float) -> np.ndarray:
        return self.height * np.exp(-((x - self.center) ** 2) / (2.0 * self.width ** 2))


Profile = Annotated[
    Union[ZeroProfile, ConstantProfile, HarmonicProfile, GaussianProfile],
    Field(discriminator="family"),
]
Component = Union[Profile, List[float]]


def _vanishes(component: Component) -> bool:
    if isinstance(component, list):
        return all(v == 0.0 for v in component)
    if isinstance(component, ZeroProfile):
        return True
    if isinstance(component, ConstantProfile):
        return component.value == 0.0
    if isinstance(component, HarmonicProfile):
        return component.omega == 0.0
    return component.height == 0.0


class GridSection(BaseModel):
    model_config = _STRICT
    n: int = Field(ge=8)
    length: float = Field(gt=0.0)


class TimeSection(BaseModel):
    model_config = _STRICT
    dt: float = Field(gt=0.0)
    steps: int = Field(ge=1)
    sample_every: int = Field(default=1, ge=1)


class PotentialSection(BaseModel):
    model_config = _STRICT
    alpha: Component = ZeroProfile(family="zero")
    beta_re: Component = ZeroProfile(family="zero")
    beta_im: Component = ZeroProfile(family="zero")
    v0_re: Component = ZeroProfile(family="zero")
    v0_im: Component = ZeroProfile(family="zero")
    v1_re: Component = ZeroProfile(family="zero")
    v1_im: Component = ZeroProfile(family="zero")

    @property
    def has_vector_potential(self) -> bool:
        return not all(_vanishes(c) for c in (self.alpha, self.beta_re, self.beta_im))

    @property
    def is_complex_reducible(self) -> bool:
        return all(_vanishes(c) for c in (self.beta_re, self.beta_im, self.v1_re, self.v1_im))


def _check_mix(mix: List[float]) -> List[float]:
    if len(mix) != 4:
        raise ValueError("quaternion_mix needs four components [c0, c1, c2, c3]")
    total = sum(c * c for c in mix)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"quaternion_mix must be normalized to 1 (sum of squares is {total!r})")
    return mix


class GaussianPacket(BaseModel):
    """mix * exp(-(x - center)^2 / (4 width^2) + i k0 x), normalized on the grid."""
    model_config = _STRICT
    family: Literal["gaussian_packet"]
    center: float = 0.0
    width: float = Field(gt=0.0)
    k0: float = 0.0
    quaternion_mix: List[float] = [1.0, 0.0, 0.0, 0.0]

    @field_validator("quaternion_mix")
    @classmethod
    def normalized_mix(cls, mix: List[float]) -> List[float]:
        return _check_mix(mix)


class PlaneWave(BaseModel):
    model_config = _STRICT
    family: Literal["plane_wave"]
    k_index: int
    quaternion_mix: List[float] = [1.0, 0.0, 0.0, 0.0]

    @field_validator("quaternion_mix")
    @classmethod
    def normalized_mix(cls, mix: List[float]) -> List[float]:
        return _check_mix(mix)


class Samples(BaseModel):
    model_config = _STRICT
    family: Literal["samples"]
    values: List[List[float]]

    @field_validator("values")
    @classmethod
    def four_components(cls, values: List[List[float]]) -> List[List[float]]:
        if any(len(row) != 4 for row in values):
            raise ValueError("every sample needs four components [x0, x1, x2, x3]")
        return values


InitialState = Annotated[Union[GaussianPacket, PlaneWave, Samples], Field(discriminator="family")]


class OutputSection(BaseModel):
    model_config = _STRICT
    observables: List[str] = []
    dump_fields: bool = False


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(pattern=r"^[A-Za-z0-9_\-]+$")
    description: Optional[str] = None
    variant: Variant = Variant.LCWE
    grid: GridSection
    time: TimeSection
    hbar: float = Field(default=1.0, gt=0.0)
    mass: float = Field(default=1.0, gt=0.0)
    safety_factor: Optional[float] = Field(default=None, gt=0.0)
    potential: PotentialSection = PotentialSection()
    initial_state: InitialState
    checks: List[CheckName] = []
    check_operator: str = "position"
    tolerances: Dict[str, float] = {}
    outputs: OutputSection = OutputSection()

    @field_validator("variant", mode="before")
    @classmethod
    def lower_variant(cls, value):
        return value.lower() if isinstance(value, str) else value

    @model_validator(mode="after")
    def check_consistency(self) -> "Scenario":
        n = self.grid.n
        for key in PotentialSection.model_fields:
            component = getattr(self.potential, key)
            if isinstance(component, list) and len(component) != n:
                raise ValueError(f"potential.{key}: {len(component)} samples on a grid of {n}")

        state = self.initial_state
        if isinstance(state, Samples) and len(state.values) != n:
            raise ValueError(f"initial_state.values: has {len(state.values)} samples, grid has {n}")
        if isinstance(state, PlaneWave) and not 0 <= abs(state.k_index) < n // 2:
            raise ValueError(f"initial_state.k_index: {state.k_index} is not resolvable on {n} points")

        known = {report for reports in CHECK_REPORTS.values() for report in reports}
        unknown = sorted(set(self.tolerances) - known)
        if unknown:
            raise ValueError(f"tolerances: unknown checks {', '.join(unknown)}")
        if any(value <= 0 for value in self.tolerances.values()):
            raise ValueError("tolerances: values must be positive")

        if self.checks and self.time.steps // self.time.sample_every < 2:
            raise ValueError(
                "time.sample_every: checks need at least 3 trajectory samples (steps / sample_every >= 2)"
            )
        if "ehrenfest_momentum" in self.checks and self.potential.has_vector_potential:
            raise ValueError("checks: ehrenfest_momentum needs Q = 0; alpha and beta must vanish")
        if "oracle_compare" in self.checks:
            if not self.potential.is_complex_reducible:
                raise ValueError("checks: oracle_compare needs beta = 0 and V1 = 0")
            if not self.has_complex_initial_state:
                raise ValueError("checks: oracle_compare needs a complex initial state (no j, k parts)")
        return self

    @property
    def has_complex_initial_state(self) -> bool:
        state = self.initial_state
        if isinstance(state, Samples):
            return all(row[2] == 0.0 and row[3] == 0.0 for row in state.values)
        return state.quaternion_mix[2] == 0.0 and state.quaternion_mix[3] == 0.0

    def tolerance_for(self, report: str) -> Optional[float]:
        return self.tolerances.get(report)
