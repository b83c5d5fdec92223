"""Monodromy matrix and Floquet multipliers of a periodic orbit.

The principal solution X(t) of X' = A(t) X, X(0) = I, with
A(t) = [[0, M^-1], [hess U(x(t)), 0]] is integrated with fixed-step RK4 over
one period. Coordinates are (positions, momenta), so X(T) is symplectic for
J = [[0, I], [-I, 0]].
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from equistab.core.exceptions import CollisionalPathError, EigenFailureError, NonFiniteIntegrationError
from equistab.schemas.solver import FloquetOptions
from equistab.services.dynamics import ProblemSpec, grad_potential, guard_collisions, hess_potential
from equistab.services.loops import TrigLoop

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MonodromyResult:
    monodromy: np.ndarray
    multipliers: np.ndarray
    max_modulus: float
    log10_max_modulus: float
    det_residual: float
    det_drift: float
    symplectic_residual: float
    pairing_residual: float
    log_scale: float = 0.0
    integrator: dict = field(default_factory=dict)

    @property
    def rescaled(self) -> bool:
        return self.log_scale != 0.0


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    max_modulus: float
    tol: float

    @property
    def margin(self) -> float:
        return self.max_modulus - (1.0 + self.tol)

    @property
    def label(self) -> str:
        return "stable" if self.stable else "unstable"


def evaluate_orbit(loop: TrigLoop, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(positions, velocities) at time t from the trig series."""
    return loop.positions([t])[0], loop.velocities([t])[0]


def symplectic_form(nd: int) -> np.ndarray:
    J = np.zeros((2 * nd, 2 * nd))
    J[:nd, nd:] = np.eye(nd)
    J[nd:, :nd] = -np.eye(nd)
    return J


def _signed_det(X: np.ndarray, log_scale: float) -> float:
    sign, logabs = np.linalg.slogdet(X)
    exponent = logabs + X.shape[0] * log_scale
    if exponent > 700:
        return math.inf
    return float(sign * math.exp(exponent))


def _variational_rhs(inverse_mass: np.ndarray, nd: int):
    def rhs(H: np.ndarray, X: np.ndarray) -> np.ndarray:
        out = np.empty_like(X)
        out[:nd] = inverse_mass[:, None] * X[nd:]
        out[nd:] = H @ X[:nd]
        return out

    return rhs


def _propagator(rhs, hessians, h: float, identity: np.ndarray) -> np.ndarray:
    """One RK4 step of X' = A(t) X applied to the identity; stage Hessians (t, t+h/2, t+h/2, t+h)."""
    H1, H2, H3, H4 = hessians
    k1 = rhs(H1, identity)
    k2 = rhs(H2, identity + 0.5 * h * k1)
    k3 = rhs(H3, identity + 0.5 * h * k2)
    k4 = rhs(H4, identity + h * k3)
    return identity + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def monodromy(
    loop: TrigLoop,
    spec: ProblemSpec,
    options: FloquetOptions | None = None,
    potential_off: bool = False,
) -> MonodromyResult:
    """Principal solution at t = T.

    Each step forms the RK4 propagator P_k and sets X <- P_k X. det X(T) is
    tracked as the running product of det P_k, so det_drift measures the
    integrator and not the roundoff of a large X.
    """
    options = options or FloquetOptions()
    nd = spec.n * spec.d
    N = options.steps
    period = loop.period
    h = period / N
    inverse_mass = 1.0 / spec.mass_vector
    rhs = _variational_rhs(inverse_mass, nd)
    checkpoints = set(np.linspace(N / options.checkpoints, N, options.checkpoints).round().astype(int))

    identity = np.eye(2 * nd)
    X = identity.copy()
    tracker = _Tracker()

    if options.mode == "analytic":
        times = np.arange(2 * N + 1) * (h / 2)
        positions = loop.positions(times)
        guard_collisions(positions, spec.min_separation, error=CollisionalPathError)
        hessians = np.zeros((2 * N + 1, nd, nd)) if potential_off else hess_potential(positions, spec, guard=False)
        for k in range(N):
            H0, Hh, H1 = hessians[2 * k], hessians[2 * k + 1], hessians[2 * k + 2]
            P = _propagator(rhs, (H0, Hh, Hh, H1), h, identity)
            X = tracker.advance(P, X, k + 1, checkpoints, options)
    else:
        x0, v0 = evaluate_orbit(loop, 0.0)
        w = np.concatenate([x0.ravel(), (spec.masses[:, None] * v0).ravel()])

        def stage(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            x = w[:nd].reshape(spec.n, spec.d)
            guard_collisions(x, spec.min_separation, error=CollisionalPathError)
            H = np.zeros((nd, nd)) if potential_off else hess_potential(x, spec, guard=False)
            force = np.zeros(nd) if potential_off else grad_potential(x, spec, guard=False).ravel()
            return np.concatenate([inverse_mass * w[nd:], force]), H

        for k in range(N):
            a1, H1 = stage(w)
            a2, H2 = stage(w + 0.5 * h * a1)
            a3, H3 = stage(w + 0.5 * h * a2)
            a4, H4 = stage(w + h * a3)
            w = w + h * (a1 + 2 * a2 + 2 * a3 + a4) / 6
            P = _propagator(rhs, (H1, H2, H3, H4), h, identity)
            X = tracker.advance(P, X, k + 1, checkpoints, options)

    integrator = {"mode": options.mode, "steps": N, "method": "rk4"}
    result = _assemble(X, tracker.log_scale, tracker.det_drift, integrator)
    logger.info(
        "monodromy.done",
        extra={"mode": options.mode, "steps": N, "max_modulus": result.max_modulus, "det_drift": result.det_drift},
    )
    return result


class _Tracker:
    """Running rescale factor and log|det| of the step propagators."""

    def __init__(self):
        self.log_scale = 0.0
        self.log_det = 0.0
        self.sign = 1.0
        self.det_drift = 0.0

    def advance(self, P, X, step, checkpoints, options) -> np.ndarray:
        X = P @ X
        if not np.all(np.isfinite(X)):
            raise NonFiniteIntegrationError(
                f"variational equation diverged at step {step}", details={"step": step}
            )
        largest = float(np.max(np.abs(X)))
        if largest > options.rescale_threshold:
            X = X / largest
            self.log_scale += math.log(largest)
        sign, logabs = np.linalg.slogdet(P)
        self.sign *= sign
        self.log_det += logabs
        if step in checkpoints:
            det = self.sign * math.exp(self.log_det)
            drift = abs(math.expm1(self.log_det)) if self.sign > 0 else abs(det - 1.0)
            self.det_drift = max(self.det_drift, drift)
        return X


def _assemble(X: np.ndarray, log_scale: float, det_drift: float, integrator: dict) -> MonodromyResult:
    nd = X.shape[0] // 2
    scaled = multipliers_of(X)
    factor = math.exp(log_scale) if log_scale < 700 else math.inf
    values = scaled * factor
    top = float(abs(scaled[0]))
    log10_max = (math.log10(top) if top > 0 else -math.inf) + log_scale / math.log(10)

    if log_scale == 0.0:
        J = symplectic_form(nd)
        symplectic_residual = float(np.max(np.abs(X.T @ J @ X - J)))
    else:
        symplectic_residual = math.nan

    return MonodromyResult(
        monodromy=X,
        multipliers=values,
        max_modulus=float(abs(values[0])),
        log10_max_modulus=log10_max,
        det_residual=abs(_signed_det(X, log_scale) - 1.0),
        det_drift=det_drift,
        symplectic_residual=symplectic_residual,
        pairing_residual=pairing_residual(values),
        log_scale=log_scale,
        integrator=integrator,
    )


def _symmetrize_conjugates(values: np.ndarray) -> np.ndarray:
    values = values.astype(complex)
    scale = np.maximum(np.abs(values), 1.0)
    real = np.abs(values.imag) <= 1e-12 * scale
    values[real] = values[real].real
    upper = [i for i in range(values.size) if values[i].imag > 0]
    lower = [i for i in range(values.size) if values[i].imag < 0]
    for i in upper:
        if not lower:
            break
        j = min(lower, key=lambda j: abs(values[i] - np.conj(values[j])))
        lower.remove(j)
        mean = 0.5 * (values[i] + np.conj(values[j]))
        values[i], values[j] = mean, np.conj(mean)
    return values


def multipliers_of(monodromy_matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by non-increasing modulus, conjugate pairs exact."""
    try:
        values = scipy.linalg.eigvals(monodromy_matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailureError(f"eigen-decomposition failed: {e}")
    if not np.all(np.isfinite(values)):
        raise EigenFailureError("eigen-decomposition returned non-finite values")
    values = _symmetrize_conjugates(values)
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    return values[order]


def multipliers(m: MonodromyResult) -> np.ndarray:
    """Multipliers of the stored monodromy, with the rescale factor restored."""
    factor = math.exp(m.log_scale) if m.log_scale < 700 else math.inf
    return multipliers_of(m.monodromy) * factor


def pairing_residual(values: np.ndarray) -> float:
    """Hausdorff distance between the spectrum S and {1/s : s in S}."""
    values = np.asarray(values, dtype=complex)
    finite = values[np.isfinite(values) & (values != 0)]
    if finite.size == 0:
        return math.inf
    inverted = 1.0 / finite
    distances = np.abs(finite[:, None] - inverted[None, :])
    return float(max(distances.min(axis=1).max(), distances.min(axis=0).max()))


def stability_verdict(m: MonodromyResult | float, tol: float = 0.05) -> StabilityVerdict:
    """Unstable iff the largest multiplier modulus exceeds 1 + tol."""
    max_modulus = m.max_modulus if isinstance(m, MonodromyResult) else float(m)
    return StabilityVerdict(stable=not max_modulus > 1.0 + tol, max_modulus=max_modulus, tol=tol)
