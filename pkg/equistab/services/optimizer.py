"""Critical points of the symmetry-reduced action.

All values and gradient norms are in the fundamental-domain convention
(full-period action divided by the quotient order l).
"""
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg

from equistab.core.config import settings
from equistab.core.exceptions import (
    CollisionalPathError,
    CollisionStallError,
    DegenerateProjectionError,
    EquistabException,
    MaxIterationsError,
    NotInBasinError,
    SingularHessianError,
)
from equistab.schemas.solver import MinimizeOptions, RefineOptions
from equistab.services.action import ReducedAction
from equistab.services.dynamics import ProblemSpec

logger = logging.getLogger(__name__)


@dataclass
class OptimizationReport:
    """
    Progress of one optimization run.

    Every accepted iterate keeps its closest approach at or above min_separation, so
    collision_flag only reports a start point that was already inside the guard.
    """

    action_value: float
    gradient_norm: float
    iterations: int = 0
    method_trace: list[tuple[str, int, float]] = field(default_factory=list)
    min_separation_seen: float = math.inf
    seed: int | None = None
    min_separation: float = 0.0

    @property
    def collision_flag(self) -> bool:
        return self.min_separation_seen < self.min_separation


@dataclass
class StartResult:
    seed: int
    z: np.ndarray | None
    report: OptimizationReport | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.error is None


def random_init(spec: ProblemSpec, seed: int, scale: float = 1.0, reduced: ReducedAction | None = None) -> np.ndarray:
    """Random equivariant coefficients with per-mode standard deviation scale / k^2."""
    reduced = reduced or ReducedAction(spec)
    if reduced.dimension == 0:
        raise DegenerateProjectionError(
            f"equivariant subspace is trivial for K = {spec.K}", details={"K": spec.K}
        )
    rng = np.random.default_rng(seed)
    modes = np.r_[1.0, np.repeat(np.arange(1, spec.K + 1), 2).astype(float)]
    std = scale / modes**2
    coefficients = rng.standard_normal((2 * spec.K + 1, spec.n, spec.d)) * std[:, None, None]
    z = reduced.B.T @ coefficients.ravel()

    distance = reduced.min_distance(z)
    target = 10.0 * spec.min_separation
    if distance == 0.0:
        raise CollisionalPathError(0.0, spec.min_separation)
    if distance < target:
        z = z * (target / distance)
    return z


def _armijo_step(
    reduced: ReducedAction,
    z: np.ndarray,
    value: float,
    gradient: np.ndarray,
    direction: np.ndarray,
    alpha: float,
    options: MinimizeOptions,
):
    slope = float(gradient @ direction)
    threshold = reduced.spec.min_separation
    collided = False
    for _ in range(options.max_halvings):
        candidate = z + alpha * direction
        distance = reduced.min_distance(candidate)
        if distance < threshold:
            collided = True
            alpha *= 0.5
            continue
        new_value, new_gradient = reduced.value_and_gradient(candidate)
        if np.isfinite(new_value) and new_value <= value + options.c1 * alpha * slope:
            return candidate, new_value, new_gradient, alpha, distance
        alpha *= 0.5
    if collided:
        raise CollisionStallError(options.max_halvings)
    return None


def minimize(
    z0: np.ndarray,
    spec: ProblemSpec,
    options: MinimizeOptions | None = None,
    reduced: ReducedAction | None = None,
    seed: int | None = None,
) -> tuple[np.ndarray, OptimizationReport]:
    """Backtracking gradient descent or BFGS on the reduced action."""
    options = options or MinimizeOptions()
    reduced = reduced or ReducedAction(spec)

    z = np.asarray(z0, dtype=float).copy()
    value, gradient = reduced.value_and_gradient(z)
    report = OptimizationReport(
        action_value=value,
        gradient_norm=float(np.linalg.norm(gradient)),
        min_separation_seen=reduced.min_distance(z),
        seed=seed,
        min_separation=spec.min_separation,
    )
    inverse_hessian = np.eye(z.size)
    first = True
    iteration = 0

    while report.gradient_norm > options.tol_fo:
        if iteration >= options.max_iter:
            report.iterations = iteration
            report.method_trace.append((options.method, iteration, report.gradient_norm))
            raise MaxIterationsError(iteration, report.gradient_norm, result=(z, report))

        if options.method == "quasi_newton":
            direction = -inverse_hessian @ gradient
            if float(direction @ gradient) >= 0.0:
                inverse_hessian = np.eye(z.size)
                direction = -gradient
        else:
            direction = -gradient
        alpha = min(1.0, 1.0 / float(np.linalg.norm(direction))) if first else 1.0

        step = _armijo_step(reduced, z, value, gradient, direction, alpha, options)
        if step is None:
            # Line search exhausted without collisions: restart from steepest descent once.
            if options.method == "quasi_newton" and not first:
                inverse_hessian = np.eye(z.size)
                first = True
                continue
            report.iterations = iteration
            raise MaxIterationsError(iteration, report.gradient_norm, result=(z, report))

        candidate, new_value, new_gradient, alpha, distance = step
        s = candidate - z
        y = new_gradient - gradient
        z, value, gradient = candidate, new_value, new_gradient
        iteration += 1
        report.min_separation_seen = min(report.min_separation_seen, distance)
        report.action_value = value
        report.gradient_norm = float(np.linalg.norm(gradient))

        if options.method == "quasi_newton":
            sy = float(s @ y)
            if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
                if first:
                    inverse_hessian = (sy / float(y @ y)) * np.eye(z.size)
                rho = 1.0 / sy
                A = np.eye(z.size) - rho * np.outer(s, y)
                inverse_hessian = A @ inverse_hessian @ A.T + rho * np.outer(s, s)
        first = False

    report.iterations = iteration
    report.method_trace.append((options.method, iteration, report.gradient_norm))
    logger.info(
        "minimize.done",
        extra={"iterations": iteration, "action": report.action_value, "gradient_norm": report.gradient_norm},
    )
    return z, report


def _damped_solve(H: np.ndarray, gradient: np.ndarray, damping: float) -> np.ndarray | None:
    system = H + damping * np.eye(H.shape[0]) if damping > 0 else H
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            step = scipy.linalg.solve(system, -gradient, assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
            return None
    return step if np.all(np.isfinite(step)) else None


def newton_refine(
    z: np.ndarray,
    spec: ProblemSpec,
    tol: float | None = None,
    reduced: ReducedAction | None = None,
    options: RefineOptions | None = None,
    report: OptimizationReport | None = None,
) -> tuple[np.ndarray, OptimizationReport]:
    """Newton on the reduced gradient with Levenberg damping."""
    options = options or RefineOptions()
    tol = options.tol if tol is None else tol
    reduced = reduced or ReducedAction(spec)

    z = np.asarray(z, dtype=float).copy()
    value, gradient = reduced.value_and_gradient(z)
    norm = float(np.linalg.norm(gradient))
    if norm > options.basin:
        raise NotInBasinError(norm, options.basin)

    report = replace(report) if report is not None else OptimizationReport(value, norm, min_separation=spec.min_separation)
    report.method_trace = list(report.method_trace)
    report.min_separation_seen = min(report.min_separation_seen, reduced.min_distance(z))
    damping = 0.0
    iteration = 0

    while norm > tol and iteration < options.max_iter:
        iteration += 1
        H = reduced.hessian(z)
        while True:
            step = _damped_solve(H, gradient, damping)
            if step is not None and reduced.min_distance(z + step) >= spec.min_separation:
                new_value, new_gradient = reduced.value_and_gradient(z + step)
                new_norm = float(np.linalg.norm(new_gradient))
                if new_norm < norm:
                    z, value, gradient, norm = z + step, new_value, new_gradient, new_norm
                    damping = damping / 10.0 if damping > options.damping_start else 0.0
                    break
            damping = options.damping_start if damping == 0.0 else damping * 10.0
            if damping > options.damping_cap:
                raise SingularHessianError(
                    f"damping exceeded {options.damping_cap:g}",
                    details={"damping": damping, "gradient_norm": norm},
                )
        report.min_separation_seen = min(report.min_separation_seen, reduced.min_distance(z))

    report.action_value = value
    report.gradient_norm = norm
    report.iterations += iteration
    report.method_trace.append(("newton", iteration, norm))
    logger.info("newton.done", extra={"iterations": iteration, "gradient_norm": norm})
    return z, report


def solve(
    z0: np.ndarray,
    spec: ProblemSpec,
    options: MinimizeOptions | None = None,
    refine: RefineOptions | None = None,
    reduced: ReducedAction | None = None,
    seed: int | None = None,
) -> tuple[np.ndarray, OptimizationReport]:
    """minimize followed by newton_refine."""
    reduced = reduced or ReducedAction(spec)
    z, report = minimize(z0, spec, options, reduced=reduced, seed=seed)
    return newton_refine(z, spec, reduced=reduced, options=refine, report=report)


def _run_start(
    spec: ProblemSpec,
    seed: int,
    options: MinimizeOptions | None,
    refine: RefineOptions | None,
    scale: float = 1.0,
) -> StartResult:
    reduced = ReducedAction(spec)
    try:
        z0 = random_init(spec, seed, scale, reduced=reduced)
        z, report = solve(z0, spec, options, refine, reduced=reduced, seed=seed)
    except EquistabException as e:
        logger.info("start.failed", extra={"seed": seed, "error": e.code})
        return StartResult(seed, None, None, error=e.code)
    return StartResult(seed, z, report)


def solve_multistart(
    spec: ProblemSpec,
    seeds: Sequence[int],
    workers: int | None = None,
    options: MinimizeOptions | None = None,
    refine: RefineOptions | None = None,
    scale: float = 1.0,
) -> list[StartResult]:
    """Independent starts ordered by (action, gradient norm); failures last."""
    workers = min(workers or settings.EQUISTAB_THREADS, settings.EQUISTAB_THREADS, max(len(seeds), 1))
    if workers <= 1:
        results = [_run_start(spec, seed, options, refine, scale) for seed in seeds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_start, spec, seed, options, refine, scale) for seed in seeds]
            results = [f.result() for f in futures]

    def order(result: StartResult):
        if not result.converged:
            return (1, math.inf, math.inf, result.seed)
        return (0, result.report.action_value, result.report.gradient_norm, result.seed)

    return sorted(results, key=order)
