import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from equistab.core.config import settings
from equistab.core.exceptions import NoConvergedStartError, SchemaError
from equistab.db.orbit_store import read_orbit
from equistab.schemas.orbit import Indicators, OrbitFile, Provenance
from equistab.schemas.problem import DiscretizationSpec, ProblemFile
from equistab.schemas.solver import MinimizeOptions, RefineOptions
from equistab.services.action import ReducedAction, virial_ratio
from equistab.services.dynamics import ProblemSpec
from equistab.services.loops import FundamentalPath, TrigLoop
from equistab.services.optimizer import OptimizationReport, solve, solve_multistart
from equistab.services.problem_service import build_spec, load_json, read_problem_file, seed_loop
from equistab.services.symmetry import unfold

logger = logging.getLogger(__name__)


@dataclass
class ResolvedOrbit:
    """A loop ready for the indicators, with the documents it came from."""

    problem: ProblemFile
    spec: ProblemSpec
    loop: TrigLoop
    orbit: OrbitFile
    path: Path | None = None  # set only when read from an orbit file


def solve_problem(
    problem: ProblemFile,
    spec: ProblemSpec,
    seed: int | None = None,
    starts: int = 1,
    tol: float | None = None,
    options: MinimizeOptions | None = None,
) -> tuple[TrigLoop, OptimizationReport]:
    """
    Find a critical point of the reduced action for a parsed problem.

    Deterministic seeds (relative equilibria, initial states, traces) run a
    single descent; random seeds fan out over `starts` consecutive seeds.
    """
    refine = RefineOptions(tol=tol) if tol is not None else RefineOptions()
    reduced = ReducedAction(spec)

    #1. Deterministic seed
    loop = seed_loop(problem, spec)
    if loop is not None:
        z, report = solve(reduced.coordinates(loop), spec, options, refine, reduced=reduced)
        return reduced.loop(z), report

    #2. Random starts
    scale = 1.0
    base = 0
    if problem.seed is not None:
        base, scale = problem.seed.seed, problem.seed.scale
    if seed is not None:
        base = seed
    seeds = [base + i for i in range(max(starts, 1))]
    results = solve_multistart(spec, seeds, options=options, refine=refine, scale=scale)

    best = results[0]
    if not best.converged:
        raise NoConvergedStartError(len(results), [r.error for r in results])
    logger.info(
        "solve.best_start",
        extra={"seed": best.seed, "action": best.report.action_value, "converged": sum(r.converged for r in results)},
    )
    return reduced.loop(best.z), best.report


def _settled_problem(problem: ProblemFile, spec: ProblemSpec) -> ProblemFile:
    discretization = DiscretizationSpec(K=spec.K, F=spec.F, M=spec.M, min_separation=spec.min_separation)
    return problem.model_copy(update={"discretization": discretization})


def orbit_to_file(
    problem: ProblemFile,
    spec: ProblemSpec,
    loop: TrigLoop,
    report: OptimizationReport | None = None,
    source: str = "solve",
    refine: RefineOptions | None = None,
) -> OrbitFile:
    refine = refine or RefineOptions()
    provenance = Provenance(source=source, tool_version=settings.VERSION)
    indicators = Indicators()
    if report is not None:
        provenance = Provenance(
            seed=report.seed,
            source=source,
            tolerances={"tol_first_order": settings.TOL_FIRST_ORDER, "tol_newton": refine.tol},
            method_trace=report.method_trace,
            tool_version=settings.VERSION,
        )
        indicators = Indicators(
            action=report.action_value,
            gradient_norm=report.gradient_norm,
            virial_ratio=virial_ratio(loop, spec),
        )
    return OrbitFile(
        name=problem.name,
        problem=_settled_problem(problem, spec),
        representation="trig",
        period=loop.period,
        coefficients=loop.coefficients.tolist(),
        provenance=provenance,
        indicators=indicators,
    )


def loop_from_orbit(orbit: OrbitFile, spec: ProblemSpec) -> TrigLoop:
    """TrigLoop of an orbit file; fundamental payloads are unfolded over the full period."""
    if not math.isclose(orbit.period, spec.period, rel_tol=1e-12):
        raise SchemaError(
            f"orbit period {orbit.period!r} does not match l*pi = {spec.period!r}",
            details={"field": "period"},
        )
    coefficients = np.asarray(orbit.coefficients, dtype=float)
    if orbit.representation == "trig":
        return TrigLoop(coefficients, orbit.period)
    return unfold(FundamentalPath.from_coefficients(coefficients), spec.group, K=spec.K)


def resolve(path: str | Path, seed: int | None = None, **overrides) -> ResolvedOrbit:
    """Load an orbit file, or solve a problem file on the fly."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"file '{path}' not found", details={"path": str(path)})
    text = path.read_text(encoding="utf-8")

    if load_json(text).get("kind") == "orbit":
        orbit = read_orbit(text)
        spec = build_spec(orbit.problem, **overrides)
        return ResolvedOrbit(orbit.problem, spec, loop_from_orbit(orbit, spec), orbit, path)

    problem = read_problem_file(text)
    spec = build_spec(problem, **overrides)
    loop, report = solve_problem(problem, spec, seed=seed)
    return ResolvedOrbit(problem, spec, loop, orbit_to_file(problem, spec, loop, report))
