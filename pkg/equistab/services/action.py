"""Lagrange action A = int (K + U) dt and its discretizations.

Three forms share one convention (G = 1, kinetic energy 1/2 sum m_i |x_i'|^2):

- full period, trigonometric coefficients: closed-form kinetic part,
  periodic trapezoid on Q = 4M nodes for the potential;
- fundamental domain [0, pi]: endpoints plus sine modes, closed-form kinetic
  part, trapezoid potential on Q + 1 nodes;
- pointwise f1 on the uniform periodic grid with forward differences.
"""
import logging
import math

import numpy as np
import scipy.linalg

from equistab.core.exceptions import CollisionalPathError, DimensionMismatchError
from equistab.services.dynamics import (
    ProblemSpec,
    grad_potential,
    guard_collisions,
    hess_potential,
    min_pairwise_distance,
    potential,
)
from equistab.services.loops import (
    FundamentalPath,
    SampledLoop,
    TrigLoop,
    fundamental_basis,
    trig_basis,
)
from equistab.services.symmetry import EquivariantBasis, equivariance_projector

logger = logging.getLogger(__name__)


def _quadrature_nodes(spec: ProblemSpec, Q: int | None) -> int:
    return Q if Q is not None else 4 * spec.M


def _guarded(positions: np.ndarray, spec: ProblemSpec):
    guard_collisions(positions, spec.min_separation, error=CollisionalPathError)
    return positions


def _check_dims(obj, spec: ProblemSpec) -> None:
    if (obj.n, obj.d) != (spec.n, spec.d):
        raise DimensionMismatchError(
            f"representation is (n={obj.n}, d={obj.d}), problem is (n={spec.n}, d={spec.d})"
        )


# ============================================
# Full period (trigonometric)
# ============================================

def kinetic_weights(K: int, spec: ProblemSpec, period: float | None = None) -> np.ndarray:
    """Diagonal of the kinetic Hessian in (mode, body, coord) order: (T/2) m_i w_k^2."""
    period = spec.period if period is None else period
    omegas = 2.0 * math.pi * np.arange(1, K + 1) / period
    per_mode = np.zeros(2 * K + 1)
    per_mode[1::2] = omegas**2
    per_mode[2::2] = omegas**2
    return 0.5 * period * np.kron(per_mode, spec.mass_vector)


def action_parts(loop: TrigLoop, spec: ProblemSpec, Q: int | None = None) -> tuple[float, float]:
    """(int K dt, int U dt) over one period."""
    _check_dims(loop, spec)
    Q = _quadrature_nodes(spec, Q)
    kinetic = 0.5 * float(kinetic_weights(loop.K, spec, loop.period) @ loop.flat() ** 2)
    positions = _guarded(loop.positions(loop.grid(Q)), spec)
    potential_integral = loop.period / Q * float(np.sum(potential(positions, spec, guard=False)))
    return kinetic, potential_integral


def action_full(loop: TrigLoop, spec: ProblemSpec, Q: int | None = None) -> float:
    kinetic, potential_integral = action_parts(loop, spec, Q)
    return kinetic + potential_integral


def virial_ratio(loop: TrigLoop, spec: ProblemSpec, Q: int | None = None) -> float:
    """2 int K / int U; equals 1 on critical points."""
    kinetic, potential_integral = action_parts(loop, spec, Q)
    return 2.0 * kinetic / potential_integral


def grad_action_full(loop: TrigLoop, spec: ProblemSpec, Q: int | None = None) -> np.ndarray:
    _check_dims(loop, spec)
    Q = _quadrature_nodes(spec, Q)
    times = loop.grid(Q)
    positions = _guarded(loop.positions(times), spec)
    forces = grad_potential(positions, spec, guard=False)
    potential_part = loop.period / Q * np.einsum("qj,qnd->jnd", trig_basis(times, loop.K, loop.period), forces)
    return kinetic_weights(loop.K, spec, loop.period) * loop.flat() + potential_part.ravel()


def hess_action_full(loop: TrigLoop, spec: ProblemSpec, Q: int | None = None) -> np.ndarray:
    _check_dims(loop, spec)
    Q = _quadrature_nodes(spec, Q)
    times = loop.grid(Q)
    positions = _guarded(loop.positions(times), spec)
    hessians = hess_potential(positions, spec, guard=False)
    basis = trig_basis(times, loop.K, loop.period)
    blocks = np.einsum("qj,qk,qab->jakb", basis, basis, hessians, optimize=True)
    size = basis.shape[1] * spec.n * spec.d
    H = loop.period / Q * blocks.reshape(size, size)
    H[np.diag_indices(size)] += kinetic_weights(loop.K, spec, loop.period)
    return 0.5 * (H + H.T)


# ============================================
# Fundamental domain [0, pi]
# ============================================

def _trapezoid_weights(Q: int) -> np.ndarray:
    weights = np.full(Q + 1, math.pi / Q)
    weights[[0, -1]] *= 0.5
    return weights


def _fundamental_kinetic_matrix(F: int, spec: ProblemSpec) -> np.ndarray:
    """Quadratic form of int_0^pi 1/2 sum m |y'|^2 over (x0, x1, A1..AF) coefficients."""
    time_part = np.zeros((F + 2, F + 2))
    time_part[:2, :2] = np.array([[1.0, -1.0], [-1.0, 1.0]]) / math.pi
    time_part[2:, 2:] = np.diag(0.5 * math.pi * np.arange(1, F + 1) ** 2)
    return np.kron(time_part, np.diag(spec.mass_vector))


def action_fundamental(path: FundamentalPath, spec: ProblemSpec, Q: int | None = None) -> float:
    _check_dims(path, spec)
    Q = _quadrature_nodes(spec, Q)
    coefficients = path.flat()
    kinetic = 0.5 * float(coefficients @ _fundamental_kinetic_matrix(path.F, spec) @ coefficients)
    times = np.linspace(0.0, math.pi, Q + 1)
    positions = _guarded(path.positions(times), spec)
    return kinetic + float(_trapezoid_weights(Q) @ potential(positions, spec, guard=False))


def grad_action_fundamental(path: FundamentalPath, spec: ProblemSpec, Q: int | None = None) -> np.ndarray:
    _check_dims(path, spec)
    Q = _quadrature_nodes(spec, Q)
    times = np.linspace(0.0, math.pi, Q + 1)
    positions = _guarded(path.positions(times), spec)
    weighted = _trapezoid_weights(Q)[:, None, None] * grad_potential(positions, spec, guard=False)
    potential_part = np.einsum("qj,qnd->jnd", fundamental_basis(times, path.F), weighted)
    return _fundamental_kinetic_matrix(path.F, spec) @ path.flat() + potential_part.ravel()


def hess_action_fundamental(path: FundamentalPath, spec: ProblemSpec, Q: int | None = None) -> np.ndarray:
    _check_dims(path, spec)
    Q = _quadrature_nodes(spec, Q)
    times = np.linspace(0.0, math.pi, Q + 1)
    positions = _guarded(path.positions(times), spec)
    hessians = _trapezoid_weights(Q)[:, None, None] * hess_potential(positions, spec, guard=False)
    basis = fundamental_basis(times, path.F)
    size = (path.F + 2) * spec.n * spec.d
    H = np.einsum("qj,qk,qab->jakb", basis, basis, hessians, optimize=True).reshape(size, size)
    H += _fundamental_kinetic_matrix(path.F, spec)
    return 0.5 * (H + H.T)


# ============================================
# Pointwise f1 on the periodic grid
# ============================================

def action_points(loop: SampledLoop, spec: ProblemSpec) -> float:
    """sum_k [1/2 sum_i m_i |x^{k+1} - x^k|^2 / h + h U(x^k)], index k+1 mod M."""
    _check_dims(loop, spec)
    h = loop.step
    samples = _guarded(loop.samples, spec)
    steps = np.roll(samples, -1, axis=0) - samples
    kinetic = 0.5 * float(np.sum(spec.masses[None, :, None] * steps**2)) / h
    return kinetic + h * float(np.sum(potential(samples, spec, guard=False)))


def grad_action_points(loop: SampledLoop, spec: ProblemSpec) -> np.ndarray:
    _check_dims(loop, spec)
    h = loop.step
    samples = _guarded(loop.samples, spec)
    laplacian = 2 * samples - np.roll(samples, -1, axis=0) - np.roll(samples, 1, axis=0)
    gradient = spec.masses[None, :, None] * laplacian / h + h * grad_potential(samples, spec, guard=False)
    return gradient.ravel()


def hess_action_points(loop: SampledLoop, spec: ProblemSpec, potential_off: bool = False) -> np.ndarray:
    """Block-circulant tridiagonal kinetic part plus block-diagonal h * hess U."""
    _check_dims(loop, spec)
    M, h, nd = loop.M, loop.step, spec.n * spec.d
    circulant = scipy.linalg.circulant(np.r_[2.0, -1.0, np.zeros(M - 3), -1.0])
    H = np.kron(circulant, np.diag(spec.mass_vector) / h)
    if not potential_off:
        samples = _guarded(loop.samples, spec)
        blocks = H.reshape(M, nd, M, nd)
        index = np.arange(M)
        blocks[index, :, index, :] += h * hess_potential(samples, spec, guard=False)
    return 0.5 * (H + H.T)


def euler_lagrange_residual(loop: TrigLoop, spec: ProblemSpec, M: int = 1024) -> float:
    """max_t |m x''(t) - grad U(x(t))| on M uniform samples."""
    _check_dims(loop, spec)
    times = loop.grid(M)
    positions = _guarded(loop.positions(times), spec)
    inertia = spec.masses[None, :, None] * loop.accelerations(times)
    return float(np.max(np.abs(inertia - grad_potential(positions, spec, guard=False))))


def polish_points(
    loop: SampledLoop, spec: ProblemSpec, tol: float = 1e-10, max_iter: int = 20, rcond: float = 1e-8
) -> tuple[SampledLoop, float]:
    """Minimum-norm Newton on f1 with the d uniform translations removed."""
    current = loop
    norm = float(np.linalg.norm(grad_action_points(current, spec)))
    for iteration in range(max_iter):
        if norm <= tol:
            break
        gradient = grad_action_points(current, spec)
        step, *_ = scipy.linalg.lstsq(hess_action_points(current, spec), gradient, cond=rcond)
        step = step.reshape(current.M, spec.n, spec.d)
        step -= np.einsum("n,knd->d", spec.masses, step) / (current.M * spec.masses.sum())
        candidate = SampledLoop(current.samples - step, current.period)
        candidate_norm = float(np.linalg.norm(grad_action_points(candidate, spec)))
        if candidate_norm >= norm:
            break
        current, norm = candidate, candidate_norm
    logger.debug("points.polished", extra={"gradient_norm": norm})
    return current, norm


# ============================================
# Symmetry-reduced coordinates
# ============================================

class ReducedAction:
    """f(z) = action_full(B z) / l on the G-equivariant subspace.

    The centre of mass is pinned at the origin unless center_of_mass=False.
    """

    def __init__(
        self,
        spec: ProblemSpec,
        basis: EquivariantBasis | None = None,
        Q: int | None = None,
        center_of_mass: bool = True,
    ):
        self.spec = spec
        self.equivariant = basis or equivariance_projector(spec.group, spec, center_of_mass=center_of_mass)
        self.B = self.equivariant.basis
        self.Q = _quadrature_nodes(spec, Q)
        self.times = np.arange(self.Q) * spec.period / self.Q
        self.trig = trig_basis(self.times, spec.K, spec.period)
        self.kinetic = kinetic_weights(spec.K, spec)
        self.scale = 1.0 / spec.l

    @property
    def dimension(self) -> int:
        return self.B.shape[1]

    def loop(self, z: np.ndarray) -> TrigLoop:
        return TrigLoop.from_flat(self.B @ z, self.spec.K, self.spec.n, self.spec.d, self.spec.period)

    def coordinates(self, loop: TrigLoop) -> np.ndarray:
        if loop.K != self.spec.K:
            loop = loop.resized(self.spec.K)
        return self.B.T @ loop.flat()

    def positions(self, z: np.ndarray) -> np.ndarray:
        coefficients = (self.B @ z).reshape(2 * self.spec.K + 1, self.spec.n * self.spec.d)
        return (self.trig @ coefficients).reshape(self.Q, self.spec.n, self.spec.d)

    def min_distance(self, z: np.ndarray) -> float:
        return min_pairwise_distance(self.positions(z))

    def _weight(self) -> float:
        return self.spec.period / self.Q

    def value(self, z: np.ndarray) -> float:
        x = self.B @ z
        positions = _guarded(self.positions(z), self.spec)
        total = 0.5 * float(self.kinetic @ x**2)
        total += self._weight() * float(np.sum(potential(positions, self.spec, guard=False)))
        return self.scale * total

    def gradient(self, z: np.ndarray) -> np.ndarray:
        return self.value_and_gradient(z)[1]

    def value_and_gradient(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        x = self.B @ z
        positions = _guarded(self.positions(z), self.spec)
        w = self._weight()
        value = 0.5 * float(self.kinetic @ x**2) + w * float(np.sum(potential(positions, self.spec, guard=False)))
        forces = grad_potential(positions, self.spec, guard=False).reshape(self.Q, -1)
        full = self.kinetic * x + w * (self.trig.T @ forces).ravel()
        return self.scale * value, self.scale * (self.B.T @ full)

    def hessian(self, z: np.ndarray) -> np.ndarray:
        full = hess_action_full(self.loop(z), self.spec, self.Q)
        H = self.scale * (self.B.T @ full @ self.B)
        return 0.5 * (H + H.T)


def grad_action(representation, spec: ProblemSpec, reduced: ReducedAction | None = None) -> np.ndarray:
    """Dispatch on FundamentalPath, SampledLoop, TrigLoop or reduced coordinates."""
    if isinstance(representation, FundamentalPath):
        return grad_action_fundamental(representation, spec)
    if isinstance(representation, SampledLoop):
        return grad_action_points(representation, spec)
    if isinstance(representation, TrigLoop):
        return grad_action_full(representation, spec)
    return (reduced or ReducedAction(spec)).gradient(np.asarray(representation, dtype=float))


def hess_action(representation, spec: ProblemSpec, reduced: ReducedAction | None = None) -> np.ndarray:
    if isinstance(representation, FundamentalPath):
        return hess_action_fundamental(representation, spec)
    if isinstance(representation, SampledLoop):
        return hess_action_points(representation, spec)
    if isinstance(representation, TrigLoop):
        return hess_action_full(representation, spec)
    return (reduced or ReducedAction(spec)).hessian(np.asarray(representation, dtype=float))
