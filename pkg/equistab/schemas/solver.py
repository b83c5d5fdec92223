from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from equistab.core.config import settings


class MinimizeOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["first_order", "quasi_newton"] = Field("quasi_newton", description="Descent direction")
    tol_fo: float = Field(default_factory=lambda: settings.TOL_FIRST_ORDER, gt=0)
    max_iter: int = Field(default_factory=lambda: settings.MAX_ITER, ge=1)
    c1: float = Field(1e-4, gt=0, lt=1, description="Armijo constant")
    max_halvings: int = Field(60, ge=1)


class RefineOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = Field(default_factory=lambda: settings.TOL_NEWTON, gt=0)
    max_iter: int = Field(50, ge=1)
    basin: float = Field(1e-4, gt=0, description="Largest gradient norm accepted as a Newton start")
    damping_start: float = 1e-8
    damping_cap: float = 1e4


class FloquetOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["analytic", "shooting"] = Field("analytic", description="Orbit source for the linearization")
    steps: int = Field(default_factory=lambda: settings.FLOQUET_STEPS, ge=1)
    rescale_threshold: float = Field(1e150, gt=1)
    checkpoints: int = Field(16, ge=1)
