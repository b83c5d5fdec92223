from typing import Literal, Optional

from pydantic import BaseModel, Field

from equistab.schemas.orbit import Indicators


class MorseRow(BaseModel):
    domain: Literal["fundamental", "period"]
    index: int = Field(..., ge=0)
    max_negative: Optional[float] = Field(None, description="Negative eigenvalue closest to zero")
    near_zero_count: int = 0
    eps_zero: float
    dimension: int = Field(..., description="Size of the Hessian that was diagonalised")


class FloquetRow(BaseModel):
    max_modulus: float
    log10_max_modulus: float
    verdict: Literal["stable", "unstable"]
    mode: Literal["analytic", "shooting"]
    steps: int
    det_residual: float
    det_drift: float
    symplectic_residual: Optional[float] = None
    pairing_residual: float
    multipliers: list[tuple[float, float]] = Field(
        default_factory=list, description="(real, imaginary) pairs by non-increasing modulus"
    )


class ReportTable(BaseModel):
    """One benchmark-table row: group, action, Morse indices, largest multiplier."""

    name: str = ""
    n: int
    d: int
    masses: list[float]
    group_order: int
    quotient_order: int
    generators: list[str]
    action: float = Field(..., description="Fundamental-domain action (full period / l)")
    gradient_norm: float
    virial_ratio: float
    morse_fundamental: Optional[MorseRow] = None
    morse_period: Optional[MorseRow] = None
    floquet: Optional[FloquetRow] = None


class CatalogEntry(BaseModel):
    path: str
    name: str
    n: int
    d: int
    representation: Literal["trig", "fundamental"]
    period: float
    indicators: Indicators


class ErrorOutput(BaseModel):
    error: str
    message: str
    details: dict = Field(default_factory=dict)
