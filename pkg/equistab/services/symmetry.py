"""Finite symmetry groups acting on space, time and body labels.

Loop action convention, used by every module:

    (g.x)_i(t) = rho(g) x_{sigma(g)^-1(i)}(tau(g)^-1 t)

Time actions are affine maps of the circle R/TZ written t -> s*t + c*T with
s = +1 (rotation by c) or s = -1 (reflection, axis at angle pi*c) and c an
exact rational in [0, 1).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
import scipy.fft
import scipy.linalg

from equistab.core.exceptions import (
    DimensionMismatchError,
    DiscontinuousUnfoldError,
    GroupNotClosedError,
    InconsistentTauError,
    MassOrbitMismatchError,
    MisalignedFundamentalDomainError,
    NonOrthogonalRhoError,
    SchemaError,
)
from equistab.services.loops import FundamentalPath, TrigLoop, fit_trig
from equistab.utils import permutations

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-12
CLOSURE_TOL = 1e-10
RANK_TOL = 1e-8
DEFAULT_CAP = 1024

TimeKind = Literal["rotation", "reflection"]


@dataclass(frozen=True)
class TimeAction:
    kind: TimeKind = "rotation"
    fraction: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("rotation", "reflection"):
            raise SchemaError(f"Unknown time action kind '{self.kind}'")
        object.__setattr__(self, "fraction", Fraction(self.fraction) % 1)

    @classmethod
    def rotation(cls, fraction) -> "TimeAction":
        return cls("rotation", Fraction(fraction))

    @classmethod
    def reflection(cls, fraction=0) -> "TimeAction":
        return cls("reflection", Fraction(fraction))

    @property
    def sign(self) -> int:
        return 1 if self.kind == "rotation" else -1

    @property
    def is_identity(self) -> bool:
        return self.kind == "rotation" and self.fraction == 0

    def compose(self, other: "TimeAction") -> "TimeAction":
        """self ∘ other."""
        sign = self.sign * other.sign
        return TimeAction(
            "rotation" if sign > 0 else "reflection",
            self.sign * other.fraction + self.fraction,
        )

    def inverse(self) -> "TimeAction":
        return TimeAction(self.kind, -self.sign * self.fraction)

    def apply(self, times, period: float):
        return self.sign * np.asarray(times, dtype=float) + float(self.fraction) * period

    def __str__(self) -> str:
        if self.is_identity:
            return "identity"
        return f"{self.kind} {self.fraction.numerator}/{self.fraction.denominator}"


@dataclass(frozen=True, eq=False)
class GroupElement:
    rho: np.ndarray
    sigma: tuple[int, ...]
    tau: TimeAction = field(default_factory=TimeAction)
    name: str = ""

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError(f"rho must be square, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", tuple(int(s) for s in self.sigma))

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    @property
    def n(self) -> int:
        return len(self.sigma)

    def validate(self) -> None:
        residual = float(np.max(np.abs(self.rho.T @ self.rho - np.eye(self.d))))
        if residual > ORTHOGONALITY_TOL:
            raise NonOrthogonalRhoError(residual)
        if not permutations.is_bijection(self.sigma, self.n):
            raise SchemaError(f"sigma {permutations.to_one_line(self.sigma)} is not a bijection")

    def compose(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.rho @ other.rho,
            permutations.compose(self.sigma, other.sigma),
            self.tau.compose(other.tau),
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.rho.T, permutations.inverse(self.sigma), self.tau.inverse())

    def same_spatial(self, other: "GroupElement", tol: float = CLOSURE_TOL) -> bool:
        return self.sigma == other.sigma and bool(np.max(np.abs(self.rho - other.rho)) <= tol)

    def matches(self, other: "GroupElement", tol: float = CLOSURE_TOL) -> bool:
        return self.tau == other.tau and self.same_spatial(other, tol)

    @property
    def is_identity(self) -> bool:
        return (
            self.tau.is_identity
            and self.sigma == permutations.identity(self.n)
            and bool(np.allclose(self.rho, np.eye(self.d), atol=CLOSURE_TOL, rtol=0.0))
        )


def identity_element(n: int, d: int) -> GroupElement:
    return GroupElement(np.eye(d), permutations.identity(n), TimeAction(), name="Id")


@dataclass(frozen=True, eq=False)
class SymmetryGroup:
    elements: tuple[GroupElement, ...]
    kernel_tau: tuple[GroupElement, ...]
    quotient_order: int
    coset_reps: tuple[GroupElement, ...]
    generators: tuple[GroupElement, ...]
    n: int
    d: int

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def period(self) -> float:
        return self.quotient_order * math.pi

    def describe(self) -> list[str]:
        """Generator listing in the style of the benchmark tables."""
        labels = [g.name or f"g{i}" for i, g in enumerate(self.generators)]
        kernel = ", ".join(l for l, g in zip(labels, self.generators) if g.tau.is_identity) or "Id"
        quotient = ", ".join(l for l, g in zip(labels, self.generators) if not g.tau.is_identity) or "Id"
        lines = [f"ker tau = <{kernel}>, Gbar = <{quotient}>"]
        for label, g in zip(labels, self.generators):
            lines.append(
                f"rho({label}) = {describe_rho(g.rho)}, sigma({label}) = "
                f"{permutations.to_cycles(g.sigma)}, tau({label}) = {g.tau}"
            )
        return lines


@dataclass(frozen=True)
class Configuration:
    positions: np.ndarray
    masses: np.ndarray | None = None

    @property
    def center_of_mass(self) -> np.ndarray:
        masses = np.ones(len(self.positions)) if self.masses is None else np.asarray(self.masses)
        return masses @ np.asarray(self.positions) / masses.sum()

    def is_centered(self, tol: float = 1e-10) -> bool:
        masses = np.ones(len(self.positions)) if self.masses is None else np.asarray(self.masses)
        scale = masses.sum() * max(np.max(np.linalg.norm(self.positions, axis=1)), 1e-300)
        return bool(np.linalg.norm(masses @ np.asarray(self.positions)) <= tol * scale)


@dataclass(frozen=True, eq=False)
class EquivariantBasis:
    projector: np.ndarray
    basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def describe_rho(rho: np.ndarray) -> str:
    d = rho.shape[0]
    if np.allclose(rho, np.eye(d)):
        return "Id"
    if np.allclose(rho, -np.eye(d)):
        return "-Id"
    if d == 2 and np.linalg.det(rho) > 0:
        angle = Fraction(math.atan2(rho[1, 0], rho[0, 0]) / math.pi).limit_denominator(64)
        return f"R({angle.numerator}pi/{angle.denominator})"
    return "[" + "; ".join(" ".join(f"{v:g}" for v in row) for row in rho) + "]"


def _find(elements: Sequence[GroupElement], candidate: GroupElement) -> GroupElement | None:
    for element in elements:
        if element.matches(candidate):
            return element
    return None


def build_group(
    generators: Sequence[GroupElement],
    cap: int = DEFAULT_CAP,
    *,
    n: int | None = None,
    d: int | None = None,
    masses: Sequence[float] | None = None,
) -> SymmetryGroup:
    """Close the generators under composition and index the cosets of ker tau."""
    if cap < 1:
        raise SchemaError("cap must be at least 1")
    if generators:
        n = generators[0].n if n is None else n
        d = generators[0].d if d is None else d
    if n is None or d is None:
        raise DimensionMismatchError("n and d are required for a group without generators")

    for g in generators:
        if g.n != n or g.d != d:
            raise DimensionMismatchError(
                f"generator '{g.name}' acts on (n={g.n}, d={g.d}), expected (n={n}, d={d})"
            )
        g.validate()
        if masses is not None:
            for body, image in enumerate(g.sigma):
                if not math.isclose(masses[body], masses[image], rel_tol=1e-12):
                    raise MassOrbitMismatchError(body + 1, image + 1)

    identity = identity_element(n, d)
    elements = [identity]
    frontier = [identity]
    while frontier:
        next_frontier = []
        for element in frontier:
            for g in generators:
                product = element.compose(g)
                if _find(elements, product) is None:
                    elements.append(product)
                    next_frontier.append(product)
                    if len(elements) > cap:
                        raise GroupNotClosedError(cap)
        frontier = next_frontier

    # A pure time rotation would shrink the period; a pure time reflection is a brake symmetry.
    for element in elements:
        if element.same_spatial(identity) and element.tau.kind == "rotation" and not element.tau.is_identity:
            raise InconsistentTauError(
                f"(rho, sigma) relations force a pure time rotation by {element.tau.fraction}",
                details={"fraction": str(element.tau.fraction)},
            )

    kernel = tuple(e for e in elements if e.tau.is_identity)
    if len(elements) % len(kernel):
        raise InconsistentTauError("ker tau does not divide the group order")
    l = len(elements) // len(kernel)

    coset_reps = []
    for k in range(l):
        wanted = (TimeAction.rotation(Fraction(k, l)), TimeAction.reflection(Fraction(k + 1, l)))
        rep = next((e for tau in wanted for e in elements if e.tau == tau), None)
        if rep is None:
            raise MisalignedFundamentalDomainError(
                f"no group element maps [0, pi] onto segment {k}",
                details={"segment": k, "quotient_order": l},
            )
        coset_reps.append(rep)

    logger.debug(
        "group.built",
        extra={"order": len(elements), "kernel": len(kernel), "quotient_order": l},
    )
    return SymmetryGroup(
        elements=tuple(elements),
        kernel_tau=kernel,
        quotient_order=l,
        coset_reps=tuple(coset_reps),
        generators=tuple(generators),
        n=n,
        d=d,
    )


# ============================================
# Presets
# ============================================

def _order_modulo_kernel(g: GroupElement, kernel: SymmetryGroup, cap: int = DEFAULT_CAP) -> int:
    power = g
    for m in range(1, cap + 1):
        if any(power.same_spatial(k) for k in kernel.elements):
            return m
        power = power.compose(g)
    raise GroupNotClosedError(cap)


def _with_tau(g: GroupElement, tau: TimeAction) -> GroupElement:
    return GroupElement(g.rho, g.sigma, tau, name=g.name)


def _kernel_group(kernel: Sequence[GroupElement], n: int, d: int) -> tuple[list[GroupElement], SymmetryGroup]:
    gens = [_with_tau(k, TimeAction()) for k in kernel]
    return gens, build_group(gens, n=n, d=d)


def cyclic(generator: GroupElement, kernel: Sequence[GroupElement] = ()) -> list[GroupElement]:
    """tau(r) = rotation by 1/m, m the order of r modulo the kernel."""
    kernel_gens, kernel_group = _kernel_group(kernel, generator.n, generator.d)
    m = _order_modulo_kernel(generator, kernel_group)
    return kernel_gens + [_with_tau(generator, TimeAction.rotation(Fraction(1, m)))]


def dihedral(
    rotation: GroupElement, reflection: GroupElement, kernel: Sequence[GroupElement] = ()
) -> list[GroupElement]:
    """tau(r) = rotation by 1/m, tau(s) = reflection t -> -t; quotient order 2m."""
    kernel_gens, kernel_group = _kernel_group(kernel, rotation.n, rotation.d)
    m = _order_modulo_kernel(rotation, kernel_group)
    return kernel_gens + [
        _with_tau(rotation, TimeAction.rotation(Fraction(1, m))),
        _with_tau(reflection, TimeAction.reflection(0)),
    ]


def brake(reflection: GroupElement, kernel: Sequence[GroupElement] = ()) -> list[GroupElement]:
    kernel_gens, _ = _kernel_group(kernel, reflection.n, reflection.d)
    return kernel_gens + [_with_tau(reflection, TimeAction.reflection(0))]


# ============================================
# Actions
# ============================================

def act_on_configuration(g: GroupElement, c):
    """(g.x)_i = rho(g) x_{sigma(g)^-1(i)}; accepts an (..., n, d) array or a Configuration."""
    positions = c.positions if isinstance(c, Configuration) else np.asarray(c, dtype=float)
    if positions.shape[-2:] != (g.n, g.d):
        raise DimensionMismatchError(
            f"configuration shape {positions.shape[-2:]} does not match (n={g.n}, d={g.d})"
        )
    out = np.empty_like(positions)
    out[..., list(g.sigma), :] = positions @ g.rho.T
    if isinstance(c, Configuration):
        return Configuration(out, c.masses)
    return out


def time_block(tau: TimeAction, K: int) -> np.ndarray:
    """(2K+1)x(2K+1) action of t -> tau^-1 t on (a0, a_k, b_k) coefficients."""
    inverse = tau.inverse()
    block = np.zeros((2 * K + 1, 2 * K + 1))
    block[0, 0] = 1.0
    for k in range(1, K + 1):
        phase = (k * inverse.fraction) % 1
        c, s = math.cos(2 * math.pi * phase), math.sin(2 * math.pi * phase)
        rows = slice(2 * k - 1, 2 * k + 1)
        if inverse.sign > 0:
            block[rows, rows] = [[c, s], [-s, c]]
        else:
            block[rows, rows] = [[c, s], [s, -c]]
    return block


def spatial_block(g: GroupElement) -> np.ndarray:
    n, d = g.n, g.d
    block = np.zeros((n * d, n * d))
    for j, image in enumerate(g.sigma):
        block[image * d:(image + 1) * d, j * d:(j + 1) * d] = g.rho
    return block


def coefficient_action(g: GroupElement, spec) -> np.ndarray:
    """Matrix L_g with coefficients(g.x) = L_g @ coefficients(x) in (mode, body, coord) order."""
    if (g.n, g.d) != (spec.n, spec.d):
        raise DimensionMismatchError(f"element acts on (n={g.n}, d={g.d}), spec is (n={spec.n}, d={spec.d})")
    return np.kron(time_block(g.tau, spec.K), spatial_block(g))


def center_of_mass_projector(masses: np.ndarray, d: int, modes: int) -> np.ndarray:
    """Orthogonal projector onto coefficients with sum_i m_i c_{j,i} = 0 for every mode j."""
    masses = np.asarray(masses, dtype=float)
    constraint = np.kron(np.eye(modes), np.kron(masses[None, :], np.eye(d)))
    gram = constraint @ constraint.T
    return np.eye(constraint.shape[1]) - constraint.T @ np.linalg.solve(gram, constraint)


def equivariance_projector(group: SymmetryGroup, spec, center_of_mass: bool = True) -> EquivariantBasis:
    """Group average P = mean_g L_g and an orthonormal basis of its range."""
    dim = (2 * spec.K + 1) * spec.n * spec.d
    projector = np.zeros((dim, dim))
    for g in group.elements:
        projector += coefficient_action(g, spec)
    projector /= group.order
    if center_of_mass:
        projector = center_of_mass_projector(spec.masses, spec.d, 2 * spec.K + 1) @ projector
    left, singular, _ = scipy.linalg.svd(projector)
    basis = left[:, singular > RANK_TOL]
    logger.debug("projector.built", extra={"dimension": dim, "rank": basis.shape[1]})
    return EquivariantBasis(projector=projector, basis=basis)


def check_equivariance(loop: TrigLoop, group: SymmetryGroup, samples: int = 256) -> float:
    """max_g max_t |(g.x)(t) - x(t)| / max_t |x(t)|."""
    if (loop.n, loop.d) != (group.n, group.d):
        raise DimensionMismatchError("loop and group dimensions differ")
    times = loop.grid(samples)
    positions = loop.positions(times)
    scale = float(np.max(np.linalg.norm(positions, axis=-1)))
    if scale == 0.0:
        return 0.0
    residual = 0.0
    for g in group.elements:
        source = loop.positions(g.tau.inverse().apply(times, loop.period))
        moved = act_on_configuration(g, source)
        residual = max(residual, float(np.max(np.linalg.norm(moved - positions, axis=-1))))
    return residual / scale


# ============================================
# Fundamental domain <-> full period
# ============================================

def _local_times(rep: GroupElement, times: np.ndarray, period: float) -> np.ndarray:
    local = np.mod(rep.tau.inverse().apply(times, period), period)
    local = np.where(local > period - 1e-9, local - period, local)
    return np.clip(local, 0.0, math.pi)


def _segment_positions(path: FundamentalPath, rep: GroupElement, times: np.ndarray, period: float) -> np.ndarray:
    return act_on_configuration(rep, path.positions(_local_times(rep, times, period)))


def joint_mismatch(path: FundamentalPath, group: SymmetryGroup) -> tuple[float, int]:
    """Largest jump of the concatenated path at t = k*pi, and the joint where it occurs."""
    l, period = group.quotient_order, group.period
    worst, where = 0.0, 0
    for k in range(1, l + 1):
        t = np.array([k * math.pi])
        left = _segment_positions(path, group.coset_reps[k - 1], t, period)
        right = _segment_positions(path, group.coset_reps[k % l], t % period, period)
        jump = float(np.max(np.linalg.norm(left - right, axis=-1)))
        if jump > worst:
            worst, where = jump, k
    return worst, where


def unfold(path: FundamentalPath, group: SymmetryGroup, K: int | None = None, tol: float = 1e-8) -> TrigLoop:
    """Concatenate coset_reps[k].path over [k pi, (k+1) pi] and fit a K-mode trigonometric loop."""
    if (path.n, path.d) != (group.n, group.d):
        raise DimensionMismatchError("path and group dimensions differ")
    l, period = group.quotient_order, group.period
    K = K if K is not None else max(1, math.ceil(path.F * l / 2))

    mismatch, joint = joint_mismatch(path, group)
    if mismatch > tol:
        raise DiscontinuousUnfoldError(mismatch, joint)
    logger.debug("unfold.joints", extra={"mismatch": mismatch, "joint": joint})

    count = max(16 * (2 * K + 1), 64 * l)
    times = np.arange(count) * period / count
    segment = np.minimum((times // math.pi).astype(int), l - 1)
    values = np.empty((count, path.n, path.d))
    for k, rep in enumerate(group.coset_reps):
        mask = segment == k
        values[mask] = _segment_positions(path, rep, times[mask], period)

    return fit_trig(times, values, K, period)


def restrict(loop: TrigLoop, group: SymmetryGroup, F: int, resolution: int | None = None) -> FundamentalPath:
    """Sample the loop on [0, pi] and fit x0 + (t/pi)(x1 - x0) + sum A_k sin(kt)."""
    if (loop.n, loop.d) != (group.n, group.d):
        raise DimensionMismatchError("loop and group dimensions differ")
    N = resolution or max(16 * F, 1024)
    x0 = loop.positions([0.0])[0]
    x1 = loop.positions([math.pi])[0]
    interior = np.arange(1, N) * math.pi / N
    linear = x0 + (interior / math.pi)[:, None, None] * (x1 - x0)
    residual = loop.positions(interior) - linear
    sine = scipy.fft.dst(residual, type=1, axis=0) / N
    return FundamentalPath(x0, x1, sine[:F])
