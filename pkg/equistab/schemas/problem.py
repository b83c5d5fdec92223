import re
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ROTATION_PATTERN = re.compile(r"^R\((-?\d+)/(\d+)\)$")


class TauSpec(BaseModel):
    kind: Literal["rotation", "reflection"] = "rotation"
    num: int = Field(0, description="Numerator of the period fraction")
    den: int = Field(1, ge=1, description="Denominator of the period fraction")


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    rho: Union[list[float], str] = Field(
        ..., description="Row-major d*d floats, or one of 'Id', '-Id', 'R(p/q)' (rotation by 2pi p/q in the xy plane)"
    )
    sigma: Union[list[int], str] = Field(..., description="One-line permutation [s(1), ..., s(n)] or cycle notation")
    tau: Optional[TauSpec] = None

    @field_validator("rho")
    @classmethod
    def validate_rho(cls, v):
        if isinstance(v, str) and v not in ("Id", "-Id") and not ROTATION_PATTERN.match(v):
            raise ValueError("rho must be a float list, 'Id', '-Id' or 'R(p/q)'")
        return v


class GroupSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Optional[Literal["cyclic", "dihedral", "brake"]] = None
    generators: list[GeneratorSpec] = Field(default_factory=list)
    kernel: list[GeneratorSpec] = Field(default_factory=list, description="Generators acting trivially on time")
    cap: int = Field(1024, ge=1)

    @model_validator(mode="after")
    def validate_preset(self):
        expected = {"cyclic": 1, "dihedral": 2, "brake": 1}
        if self.preset is not None:
            if len(self.generators) != expected[self.preset]:
                raise ValueError(f"preset '{self.preset}' takes {expected[self.preset]} generator(s)")
        else:
            missing = [g.name or str(i) for i, g in enumerate(self.generators) if g.tau is None]
            if missing:
                raise ValueError(f"generators without a preset need tau: {', '.join(missing)}")
        return self


class DiscretizationSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    K: Optional[int] = Field(None, ge=1)
    F: Optional[int] = Field(None, ge=1)
    M: Optional[int] = Field(None, ge=8)
    min_separation: Optional[float] = Field(None, gt=0)


class RelativeEquilibriumSeed(BaseModel):
    type: Literal["relative_equilibrium"]
    shape: Literal["lagrange", "euler", "polygon", "kepler"]
    winding: int = Field(1, ge=1)
    phase: float = 0.0


class InitialStateSeed(BaseModel):
    type: Literal["initial_state"]
    positions: list[list[float]]
    velocities: list[list[float]]
    period: float = Field(..., gt=0)


class TraceSeed(BaseModel):
    type: Literal["trace"]
    samples: list[list[list[float]]]


class RandomSeed(BaseModel):
    type: Literal["random"]
    seed: int = 0
    scale: float = Field(1.0, gt=0)


SeedSpec = Annotated[
    Union[RelativeEquilibriumSeed, InitialStateSeed, TraceSeed, RandomSeed],
    Field(discriminator="type"),
]


class ProblemFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["problem"] = "problem"
    version: int = Field(1, ge=1)
    name: str = ""
    description: str = ""
    n: int = Field(..., ge=2)
    d: Literal[2, 3]
    masses: list[float]
    group: GroupSpec = Field(default_factory=GroupSpec)
    discretization: DiscretizationSpec = Field(default_factory=DiscretizationSpec)
    seed: Optional[SeedSpec] = None

    @model_validator(mode="after")
    def validate_masses(self):
        if len(self.masses) != self.n:
            raise ValueError(f"expected {self.n} masses, got {len(self.masses)}")
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        return self
