import json
import logging
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from equistab.core.exceptions import SchemaError
from equistab.schemas.problem import GeneratorSpec, GroupSpec, ProblemFile
from equistab.services import seeds
from equistab.services.dynamics import ProblemSpec
from equistab.services.loops import TrigLoop
from equistab.services.symmetry import (
    GroupElement,
    SymmetryGroup,
    TimeAction,
    brake,
    build_group,
    cyclic,
    dihedral,
)
from equistab.utils import permutations

logger = logging.getLogger(__name__)


def _validation_error(e: ValidationError) -> SchemaError:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    return SchemaError(
        f"{location}: {first['msg']}",
        details={"field": location, "errors": len(e.errors())},
    )


def load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
            details={"line": e.lineno, "column": e.colno},
        )
    if not isinstance(data, dict):
        raise SchemaError("top-level JSON value must be an object")
    return data


def read_problem_file(text: str) -> ProblemFile:
    try:
        return ProblemFile.model_validate(load_json(text))
    except ValidationError as e:
        raise _validation_error(e)


def rho_matrix(rho, d: int) -> np.ndarray:
    if rho == "Id":
        return np.eye(d)
    if rho == "-Id":
        return -np.eye(d)
    if isinstance(rho, str):
        num, den = (int(v) for v in rho[2:-1].split("/"))
        angle = 2 * math.pi * float(Fraction(num, den))
        matrix = np.eye(d)
        matrix[:2, :2] = [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]
        return matrix
    if len(rho) != d * d:
        raise SchemaError(f"rho needs {d * d} entries, got {len(rho)}", details={"field": "rho"})
    return np.asarray(rho, dtype=float).reshape(d, d)


def sigma_tuple(sigma, n: int) -> tuple[int, ...]:
    if isinstance(sigma, str):
        try:
            perm = permutations.from_cycles(sigma, n)
        except (ValueError, IndexError):
            raise SchemaError(f"cannot parse cycle notation '{sigma}' for n = {n}", details={"field": "sigma"})
    else:
        perm = permutations.from_one_line(sigma)
    if not permutations.is_bijection(perm, n):
        raise SchemaError(f"sigma {sigma} is not a permutation of 1..{n}", details={"field": "sigma"})
    return perm


def build_generator(spec: GeneratorSpec, n: int, d: int) -> GroupElement:
    tau = TimeAction() if spec.tau is None else TimeAction(spec.tau.kind, Fraction(spec.tau.num, spec.tau.den))
    return GroupElement(rho_matrix(spec.rho, d), sigma_tuple(spec.sigma, n), tau, name=spec.name)


def build_symmetry(group: GroupSpec, n: int, d: int, masses) -> SymmetryGroup:
    kernel = [build_generator(g, n, d) for g in group.kernel]
    generators = [build_generator(g, n, d) for g in group.generators]
    for g in kernel + generators:
        g.validate()

    if group.preset == "cyclic":
        generators = cyclic(generators[0], kernel)
    elif group.preset == "dihedral":
        generators = dihedral(generators[0], generators[1], kernel)
    elif group.preset == "brake":
        generators = brake(generators[0], kernel)
    else:
        generators = [GroupElement(k.rho, k.sigma, TimeAction(), k.name) for k in kernel] + generators
    return build_group(generators, group.cap, n=n, d=d, masses=list(masses))


def build_spec(problem: ProblemFile, **overrides) -> ProblemSpec:
    """ProblemSpec from a validated file; non-None overrides beat the file, settings fill the rest."""
    group = build_symmetry(problem.group, problem.n, problem.d, problem.masses)
    discretization = problem.discretization.model_dump(exclude_none=True)
    discretization.update({k: v for k, v in overrides.items() if v is not None})
    spec = ProblemSpec(np.asarray(problem.masses, dtype=float), problem.d, group, name=problem.name, **discretization)
    logger.info(
        "problem.parsed",
        extra={"problem": problem.name, "n": spec.n, "d": spec.d, "order": group.order, "l": group.quotient_order},
    )
    return spec


def parse_problem(text: str, **overrides) -> ProblemSpec:
    return build_spec(read_problem_file(text), **overrides)


def load_problem(path: str | Path, **overrides) -> tuple[ProblemFile, ProblemSpec]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"file '{path}' not found", details={"path": str(path)})
    problem = read_problem_file(path.read_text(encoding="utf-8"))
    return problem, build_spec(problem, **overrides)


def seed_loop(problem: ProblemFile, spec: ProblemSpec) -> TrigLoop | None:
    """Deterministic seed loop, or None for a random start."""
    seed = problem.seed
    if seed is None or seed.type == "random":
        return None
    if seed.type == "relative_equilibrium":
        return seeds.relative_equilibrium(spec, seed.shape, seed.winding, seed.phase)
    if seed.type == "initial_state":
        return seeds.initial_state(spec, seed.positions, seed.velocities, seed.period)
    return seeds.trace(spec, seed.samples)
