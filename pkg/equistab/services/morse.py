"""Discrete Morse index of a critical point.

Two readings are supported: the index of the action restricted to the
G-equivariant subspace (reduced trigonometric Hessian), and the index of the
unconstrained pointwise action over the full period.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg

from equistab.core.config import settings
from equistab.core.exceptions import NotCriticalError, NotSymmetricError
from equistab.services.action import (
    ReducedAction,
    euler_lagrange_residual,
    hess_action_points,
    polish_points,
)
from equistab.services.dynamics import ProblemSpec
from equistab.services.loops import FundamentalPath, SampledLoop, TrigLoop
from equistab.services.symmetry import unfold

logger = logging.getLogger(__name__)

EPS_ZERO_RELATIVE = 1e-8
GRADIENT_TOL = 1e-6
EL_TOL = 1e-3
DEFLATION_RCOND = 1e-8
MIN_COARSE_GRID = 16


@dataclass(frozen=True, eq=False)
class MorseResult:
    domain: Literal["fundamental", "period"]
    index: int
    eigenvalues: np.ndarray
    max_negative: float | None
    near_zero_count: int
    eps_zero: float
    tolerances: dict = field(default_factory=dict)
    floor: np.ndarray | None = None

    def index_at(self, eps_zero: float) -> int:
        """Recount the stored spectrum with another zero threshold."""
        return classify(self.eigenvalues, eps_zero, self.floor)[0]


def classify(
    eigenvalues: np.ndarray, eps_zero: float, floor: np.ndarray | None = None
) -> tuple[int, float | None, int]:
    """(index, max_negative, near-zero count) with threshold max(eps_zero, floor)."""
    threshold = eps_zero if floor is None else np.maximum(eps_zero, floor)
    negative = eigenvalues[eigenvalues < -threshold]
    near_zero = int(np.count_nonzero(np.abs(eigenvalues) <= threshold))
    max_negative = float(negative.max()) if negative.size else None
    return int(negative.size), max_negative, near_zero


def count_negative(H: np.ndarray, eps_zero: float | None = None) -> tuple[int, np.ndarray, float | None, float, int]:
    """(index, ascending eigenvalues, max_negative, eps_zero used, near-zero count)."""
    H = np.asarray(H, dtype=float)
    scale = float(np.max(np.abs(H))) if H.size else 0.0
    asymmetry = float(np.max(np.abs(H - H.T))) if H.size else 0.0
    if asymmetry > 1e-8 * max(scale, 1e-300):
        raise NotSymmetricError(
            f"Hessian asymmetry {asymmetry:.3e} exceeds tolerance", details={"asymmetry": asymmetry}
        )
    eigenvalues = scipy.linalg.eigvalsh(0.5 * (H + H.T))
    if eps_zero is None:
        eps_zero = EPS_ZERO_RELATIVE * (float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0)
    index, max_negative, near_zero = classify(eigenvalues, eps_zero)
    return index, eigenvalues, max_negative, eps_zero, near_zero


def morse_fundamental(
    representation: TrigLoop | FundamentalPath | np.ndarray,
    spec: ProblemSpec,
    eps_zero: float | None = None,
    reduced: ReducedAction | None = None,
    gradient_tol: float = GRADIENT_TOL,
) -> MorseResult:
    """Index of B^T H B on the equivariant subspace."""
    reduced = reduced or ReducedAction(spec)
    if isinstance(representation, FundamentalPath):
        representation = unfold(representation, spec.group, K=spec.K)
    if isinstance(representation, TrigLoop):
        z = reduced.coordinates(representation)
    else:
        z = np.asarray(representation, dtype=float)

    gradient_norm = float(np.linalg.norm(reduced.gradient(z)))
    if gradient_norm > gradient_tol:
        raise NotCriticalError(gradient_norm, gradient_tol)

    index, eigenvalues, max_negative, eps, near_zero = count_negative(reduced.hessian(z), eps_zero)
    logger.info("morse.fundamental", extra={"index": index, "near_zero": near_zero, "eps_zero": eps})
    return MorseResult(
        domain="fundamental",
        index=index,
        eigenvalues=eigenvalues,
        max_negative=max_negative,
        near_zero_count=near_zero,
        eps_zero=eps,
        tolerances={"gradient_norm": gradient_norm, "gradient_tol": gradient_tol, "K": spec.K},
    )


def symmetry_directions(loop: SampledLoop) -> np.ndarray:
    """Translations, rotation generators and the discrete time shift of the samples, as columns."""
    samples = loop.samples
    d = samples.shape[-1]
    columns = []
    for a in range(d):
        shift = np.zeros_like(samples)
        shift[..., a] = 1.0
        columns.append(shift.ravel())
    for a, b in itertools.combinations(range(d), 2):
        turn = np.zeros_like(samples)
        turn[..., a] = -samples[..., b]
        turn[..., b] = samples[..., a]
        columns.append(turn.ravel())
    columns.append((np.roll(samples, -1, axis=0) - np.roll(samples, 1, axis=0)).ravel())
    return np.column_stack(columns)


def symmetry_complement(loop: SampledLoop) -> np.ndarray:
    """Orthonormal basis of the complement of symmetry_directions(loop)."""
    directions = scipy.linalg.orth(symmetry_directions(loop), rcond=DEFLATION_RCOND)
    return scipy.linalg.null_space(directions.T)


def discretization_floor(fine: np.ndarray, h_fine: float, coarse: np.ndarray, h_coarse: float) -> np.ndarray:
    """|lambda_M - (h_M / h_{M/2}) lambda_{M/2}| per ascending eigenvalue.

    Eigenvalues of the f1 Hessian scale with h, so lambda / h converges with the
    grid; the difference between two grids bounds the discretization error of the
    lowest modes. Eigenvalues above the coarse spectrum get no floor.
    """
    floor = np.zeros_like(fine)
    k = min(fine.size, coarse.size)
    floor[:k] = np.abs(fine[:k] - (h_fine / h_coarse) * coarse[:k])
    return floor


def _period_hessian(loop: TrigLoop, spec: ProblemSpec, M: int, polish: bool):
    sample = loop.sample(M)
    gradient_norm = None
    if polish:
        sample, gradient_norm = polish_points(sample, spec)
    complement = symmetry_complement(sample)
    return complement.T @ hess_action_points(sample, spec) @ complement, sample.step, gradient_norm


def morse_period(
    loop: TrigLoop,
    spec: ProblemSpec,
    M: int | None = None,
    eps_zero: float | None = None,
    el_tol: float = EL_TOL,
    polish: bool = True,
    discretization_check: bool = True,
) -> MorseResult:
    """Index of the pointwise f1 Hessian on the M-point periodic grid.

    Translations, rotations and the time shift are deflated. With
    discretization_check, the same count on M/2 points sets a per-eigenvalue
    zero floor, so modes that are null in the continuum and only O(h^2) away
    from zero on the grid are not counted.
    """
    M = M or settings.PERIOD_GRID
    residual = euler_lagrange_residual(loop, spec)
    if residual > el_tol:
        raise NotCriticalError(residual, el_tol)

    #1. Fine grid
    H, h, gradient_norm = _period_hessian(loop, spec, M, polish)
    _, eigenvalues, _, eps, _ = count_negative(H, eps_zero)

    #2. Coarse grid
    floor = None
    coarse_M = M // 2
    if discretization_check and coarse_M >= MIN_COARSE_GRID:
        coarse_H, coarse_h, _ = _period_hessian(loop, spec, coarse_M, polish)
        coarse = scipy.linalg.eigvalsh(0.5 * (coarse_H + coarse_H.T))
        floor = discretization_floor(eigenvalues, h, coarse, coarse_h)

    #3. Count
    index, max_negative, near_zero = classify(eigenvalues, eps, floor)
    logger.info("morse.period", extra={"index": index, "near_zero": near_zero, "M": M, "eps_zero": eps})
    return MorseResult(
        domain="period",
        index=index,
        eigenvalues=eigenvalues,
        max_negative=max_negative,
        near_zero_count=near_zero,
        eps_zero=eps,
        tolerances={
            "el_residual": residual,
            "el_tol": el_tol,
            "M": M,
            "coarse_M": coarse_M if floor is not None else None,
            "polished_gradient": gradient_norm,
        },
        floor=floor,
    )
