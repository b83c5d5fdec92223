"""Newtonian n-body potential, its derivatives and the first-order flow.

Units: G = 1. Forces are gradients of U = sum_{i<j} m_i m_j / |x_i - x_j|,
so the equations of motion read m_i x_i'' = grad_i U.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from equistab.core.config import settings
from equistab.core.exceptions import (
    CollisionalConfigurationError,
    DimensionMismatchError,
    MassOrbitMismatchError,
    SchemaError,
)
from equistab.services.symmetry import GroupElement, SymmetryGroup, build_group

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    masses: np.ndarray
    d: int
    group: SymmetryGroup
    K: int = field(default_factory=lambda: settings.DEFAULT_K)
    F: int = field(default_factory=lambda: settings.DEFAULT_F)
    M: int = field(default_factory=lambda: settings.DEFAULT_M)
    min_separation: float = field(default_factory=lambda: settings.MIN_SEPARATION)
    name: str = ""

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        if masses.ndim != 1 or masses.size < 2:
            raise SchemaError("at least two bodies are required", details={"field": "masses"})
        if np.any(masses <= 0) or not np.all(np.isfinite(masses)):
            raise SchemaError("masses must be positive", details={"field": "masses"})
        if self.d not in (2, 3):
            raise SchemaError(f"d must be 2 or 3, got {self.d}", details={"field": "d"})
        if self.K < 1 or self.F < 1 or self.M < 8:
            raise SchemaError("require K >= 1, F >= 1, M >= 8", details={"field": "discretization"})
        if self.min_separation <= 0:
            raise SchemaError("min_separation must be positive", details={"field": "min_separation"})
        if (self.group.n, self.group.d) != (masses.size, self.d):
            raise DimensionMismatchError(
                f"group acts on (n={self.group.n}, d={self.group.d}), "
                f"problem has (n={masses.size}, d={self.d})"
            )
        for g in self.group.elements:
            for body, image in enumerate(g.sigma):
                if not math.isclose(masses[body], masses[image], rel_tol=1e-12):
                    raise MassOrbitMismatchError(body + 1, image + 1)

    @property
    def n(self) -> int:
        return self.masses.size

    @property
    def l(self) -> int:
        return self.group.quotient_order

    @property
    def period(self) -> float:
        return self.group.period

    @property
    def mass_vector(self) -> np.ndarray:
        """Diagonal of the (nd)x(nd) mass matrix."""
        return np.repeat(self.masses, self.d)

    def with_discretization(self, **overrides) -> "ProblemSpec":
        values = dict(K=self.K, F=self.F, M=self.M, min_separation=self.min_separation)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return ProblemSpec(self.masses, self.d, self.group, name=self.name, **values)


def make_spec(
    masses: Sequence[float],
    d: int,
    generators: Sequence[GroupElement] = (),
    **discretization,
) -> ProblemSpec:
    group = build_group(list(generators), n=len(masses), d=d, masses=list(masses))
    return ProblemSpec(np.asarray(masses, dtype=float), d, group, **discretization)


@dataclass(frozen=True, eq=False)
class PhaseState:
    x: np.ndarray
    y: np.ndarray
    min_distance: float = field(init=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 2:
            raise DimensionMismatchError(f"positions {x.shape} and momenta {y.shape} differ")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("PhaseState entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "min_distance", min_pairwise_distance(x))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x.ravel(), self.y.ravel()])

    @classmethod
    def from_flat(cls, vector: np.ndarray, n: int, d: int) -> "PhaseState":
        vector = np.asarray(vector, dtype=float)
        return cls(vector[: n * d].reshape(n, d), vector[n * d:].reshape(n, d))


def _pairs(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Separation vectors r_ij = x_i - x_j and distances, shape (..., n, n, d) / (..., n, n)."""
    diff = positions[..., :, None, :] - positions[..., None, :, :]
    return diff, np.linalg.norm(diff, axis=-1)


def min_pairwise_distance(positions: np.ndarray) -> float:
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[-2]
    _, dist = _pairs(positions)
    upper = np.triu_indices(n, k=1)
    return float(np.min(dist[..., upper[0], upper[1]]))


def guard_collisions(positions: np.ndarray, threshold: float, error=CollisionalConfigurationError) -> float:
    distance = min_pairwise_distance(positions)
    if not distance >= threshold:
        raise error(distance, threshold)
    return distance


def _check_shape(positions: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    if positions.shape[-2:] != (spec.n, spec.d):
        raise DimensionMismatchError(
            f"configuration shape {positions.shape[-2:]} does not match (n={spec.n}, d={spec.d})"
        )
    return positions


def _mass_products(spec: ProblemSpec) -> np.ndarray:
    products = np.outer(spec.masses, spec.masses)
    np.fill_diagonal(products, 0.0)
    return products


def _inverse_distances(dist: np.ndarray) -> np.ndarray:
    n = dist.shape[-1]
    with np.errstate(divide="ignore"):
        inv = np.where(np.eye(n, dtype=bool), 0.0, 1.0 / np.where(np.eye(n, dtype=bool), 1.0, dist))
    return inv


def potential(c, spec: ProblemSpec, guard: bool = True):
    """U(x); accepts (n, d) or a batch (..., n, d)."""
    positions = _check_shape(c, spec)
    if guard:
        guard_collisions(positions, spec.min_separation)
    _, dist = _pairs(positions)
    values = 0.5 * np.sum(_mass_products(spec) * _inverse_distances(dist), axis=(-2, -1))
    return float(values) if np.ndim(values) == 0 else values


def grad_potential(c, spec: ProblemSpec, guard: bool = True) -> np.ndarray:
    """dU/dx_i = sum_j m_i m_j (x_j - x_i) / |x_j - x_i|^3."""
    positions = _check_shape(c, spec)
    if guard:
        guard_collisions(positions, spec.min_separation)
    diff, dist = _pairs(positions)
    weights = _mass_products(spec) * _inverse_distances(dist) ** 3
    return -np.einsum("...ij,...ijd->...id", weights, diff)


def hess_potential(c, spec: ProblemSpec, guard: bool = True) -> np.ndarray:
    """(nd)x(nd) Hessian of U; batched input gives (..., nd, nd)."""
    positions = _check_shape(c, spec)
    if guard:
        guard_collisions(positions, spec.min_separation)
    n, d = spec.n, spec.d
    diff, dist = _pairs(positions)
    inv = _inverse_distances(dist)
    products = _mass_products(spec)
    # d^2 U / dx_i dx_j for i != j: m_i m_j (I/|r|^3 - 3 r r^T/|r|^5)
    outer = np.einsum("...ija,...ijb->...ijab", diff, diff)
    blocks = products[..., None, None] * (
        np.eye(d) * (inv**3)[..., None, None] - 3.0 * outer * (inv**5)[..., None, None]
    )
    diagonal = -blocks.sum(axis=-3)
    index = np.arange(n)
    blocks[..., index, index, :, :] = diagonal
    batch = positions.shape[:-2]
    return np.swapaxes(blocks, -3, -2).reshape(*batch, n * d, n * d)


def vector_field(s: PhaseState, spec: ProblemSpec, guard: bool = True) -> PhaseState:
    """(x', y') = (M^-1 y, grad U(x))."""
    velocity = s.y / spec.masses[:, None]
    force = grad_potential(s.x, spec, guard=guard)
    return PhaseState(velocity, force)


def linearization_matrix(c, spec: ProblemSpec, guard: bool = True, hessian: np.ndarray | None = None) -> np.ndarray:
    """A(t) = [[0, M^-1], [hess U(x(t)), 0]] of size 2nd."""
    nd = spec.n * spec.d
    H = hess_potential(c, spec, guard=guard) if hessian is None else hessian
    A = np.zeros((2 * nd, 2 * nd))
    A[:nd, nd:] = np.diag(1.0 / spec.mass_vector)
    A[nd:, :nd] = H
    return A


def energy(s: PhaseState, spec: ProblemSpec) -> float:
    """H = 1/2 y^T M^-1 y - U(x)."""
    kinetic = 0.5 * float(np.sum(s.y**2 / spec.masses[:, None]))
    return kinetic - potential(s.x, spec)


def angular_momentum(s: PhaseState) -> np.ndarray:
    if s.x.shape[1] == 2:
        return np.array([np.sum(s.x[:, 0] * s.y[:, 1] - s.x[:, 1] * s.y[:, 0])])
    return np.sum(np.cross(s.x, s.y), axis=0)


def rk4_step(fn: Callable[[float, np.ndarray], np.ndarray], t: float, w: np.ndarray, h: float) -> np.ndarray:
    k1 = fn(t, w)
    k2 = fn(t + h / 2, w + h * k1 / 2)
    k3 = fn(t + h / 2, w + h * k2 / 2)
    k4 = fn(t + h, w + h * k3)
    return w + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def flat_field(spec: ProblemSpec, guard: bool = True) -> Callable[[float, np.ndarray], np.ndarray]:
    """Autonomous vector field on flat (x, y) vectors for integrators."""
    nd = spec.n * spec.d
    inverse_mass = 1.0 / spec.mass_vector

    def fn(_t: float, w: np.ndarray) -> np.ndarray:
        x = w[:nd].reshape(spec.n, spec.d)
        out = np.empty_like(w)
        out[:nd] = inverse_mass * w[nd:]
        out[nd:] = grad_potential(x, spec, guard=guard).ravel()
        return out

    return fn


def flow(s: PhaseState, spec: ProblemSpec, duration: float, steps: int) -> PhaseState:
    """Fixed-step RK4 flow map."""
    fn = flat_field(spec)
    h = duration / steps
    w = s.flat()
    for k in range(steps):
        w = rk4_step(fn, k * h, w, h)
    return PhaseState.from_flat(w, spec.n, spec.d)
