from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from equistab.schemas.problem import ProblemFile


class Provenance(BaseModel):
    seed: Optional[int] = None
    source: str = Field("solve", description="How the orbit was produced")
    tolerances: dict[str, float] = Field(default_factory=dict)
    method_trace: list[tuple[str, int, float]] = Field(default_factory=list)
    tool_version: str = ""


class Indicators(BaseModel):
    action: Optional[float] = None
    gradient_norm: Optional[float] = None
    virial_ratio: Optional[float] = None
    morse_fundamental: Optional[int] = None
    morse_fundamental_max_negative: Optional[float] = None
    morse_period: Optional[int] = None
    morse_period_max_negative: Optional[float] = None
    max_multiplier: Optional[float] = None
    verdict: Optional[Literal["stable", "unstable"]] = None


class OrbitFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["orbit"] = "orbit"
    version: int = Field(1, ge=1)
    name: str = ""
    problem: ProblemFile
    representation: Literal["trig", "fundamental"] = "trig"
    period: float = Field(..., gt=0)
    coefficients: list[list[list[float]]] = Field(
        ..., description="trig: rows a0, a1, b1, ...; fundamental: rows x0, x1, A1..AF; each row n x d"
    )
    provenance: Provenance = Field(default_factory=Provenance)
    indicators: Indicators = Field(default_factory=Indicators)

    @model_validator(mode="after")
    def validate_shape(self):
        rows = len(self.coefficients)
        if self.representation == "trig" and rows % 2 != 1:
            raise ValueError("trig payload needs 2K+1 rows")
        if self.representation == "fundamental" and rows < 3:
            raise ValueError("fundamental payload needs x0, x1 and at least one sine row")
        for row in self.coefficients:
            if len(row) != self.problem.n or any(len(body) != self.problem.d for body in row):
                raise ValueError(f"every coefficient row must be {self.problem.n} x {self.problem.d}")
        return self
