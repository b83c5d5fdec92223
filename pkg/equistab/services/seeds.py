"""Initial loops for the optimizer.

Every seed is returned as a TrigLoop at the problem's K and period; callers
project it onto the equivariant subspace.
"""
import itertools
import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from equistab.core.exceptions import DimensionMismatchError, NonFiniteIntegrationError, SchemaError
from equistab.services.dynamics import ProblemSpec, flat_field, grad_potential, potential
from equistab.services.loops import TrigLoop, fit_trig
from equistab.services.symmetry import check_equivariance

logger = logging.getLogger(__name__)

SHAPES = ("lagrange", "euler", "polygon", "kepler")
MAX_RELABEL_BODIES = 5


def central_configuration(shape: str, n: int) -> np.ndarray:
    """Planar shape of unit scale; a central configuration for equal masses."""
    if shape == "lagrange":
        if n != 3:
            raise SchemaError("the Lagrange triangle needs n = 3", details={"field": "seed.shape"})
        angles = 2 * math.pi * np.arange(3) / 3 + math.pi / 2
    elif shape == "euler":
        if n != 3:
            raise SchemaError("the Euler collinear shape needs n = 3", details={"field": "seed.shape"})
        return np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    elif shape in ("polygon", "kepler"):
        angles = 2 * math.pi * np.arange(n) / n
    else:
        raise SchemaError(f"unknown relative equilibrium shape '{shape}'", details={"field": "seed.shape"})
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def _embed(planar: np.ndarray, d: int) -> np.ndarray:
    if d == 2:
        return planar
    return np.concatenate([planar, np.zeros((planar.shape[0], d - 2))], axis=1)


def relative_equilibrium(spec: ProblemSpec, shape: str, winding: int = 1, phase: float = 0.0) -> TrigLoop:
    """Rigid rotation of a central configuration, once per period times `winding`."""
    if not 1 <= winding <= spec.K:
        raise SchemaError(f"winding must lie in [1, K={spec.K}]", details={"field": "seed.winding"})
    shape_xy = central_configuration(shape, spec.n)
    rotation = np.array([[math.cos(phase), -math.sin(phase)], [math.sin(phase), math.cos(phase)]])
    shape_xy = shape_xy @ rotation.T
    shape_xy = shape_xy - spec.masses @ shape_xy / spec.masses.sum()
    c = _embed(shape_xy, spec.d)

    # grad U(c) = -lam M c on a central configuration, lam = U / I by homogeneity.
    inertia = float(np.sum(spec.masses[:, None] * c**2))
    lam = potential(c, spec) / inertia
    residual = np.max(np.abs(grad_potential(c, spec) + lam * spec.masses[:, None] * c))
    if residual > 1e-8 * lam:
        logger.warning("seed.not_central", extra={"shape": shape, "residual": float(residual)})

    omega = 2 * math.pi * winding / spec.period
    scaled = (lam / omega**2) ** (1.0 / 3.0) * c
    turned = np.zeros_like(scaled)
    turned[:, 0], turned[:, 1] = -scaled[:, 1], scaled[:, 0]

    coefficients = np.zeros((2 * spec.K + 1, spec.n, spec.d))
    coefficients[2 * winding - 1] = scaled
    coefficients[2 * winding] = turned
    return TrigLoop(coefficients, spec.period)


def kepler_loop(spec: ProblemSpec) -> TrigLoop:
    return relative_equilibrium(spec, "kepler")


def lagrange_loop(spec: ProblemSpec) -> TrigLoop:
    return relative_equilibrium(spec, "lagrange")


def euler_loop(spec: ProblemSpec) -> TrigLoop:
    return relative_equilibrium(spec, "euler")


def trace(spec: ProblemSpec, samples) -> TrigLoop:
    """Fit S uniformly timed configurations covering one period."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3 or samples.shape[1:] != (spec.n, spec.d):
        raise DimensionMismatchError(f"trace samples must be (S, {spec.n}, {spec.d}), got {samples.shape}")
    if samples.shape[0] < 3:
        raise SchemaError("a trace needs at least 3 samples", details={"field": "seed.samples"})
    count = samples.shape[0]
    modes = min(spec.K, (count - 1) // 2)
    times = np.arange(count) * spec.period / count
    return fit_trig(times, samples, modes, spec.period).resized(spec.K)


def _candidates(samples: np.ndarray, n: int):
    labellings = itertools.permutations(range(n)) if n <= MAX_RELABEL_BODIES else [tuple(range(n))]
    count = samples.shape[0]
    reversed_index = (-np.arange(count)) % count
    for labelling in labellings:
        relabelled = samples[:, list(labelling)]
        yield labelling, False, relabelled
        yield labelling, True, relabelled[reversed_index]


def initial_state(spec: ProblemSpec, positions, velocities, period: float) -> TrigLoop:
    """Integrate a known periodic initial condition and rescale it to the problem period.

    Kepler scaling x -> lam x, t -> mu t with lam^3 = mu^2 keeps solutions
    solutions. Body labels and time direction are chosen among all
    candidates to minimise the equivariance residual.
    """
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    if positions.shape != (spec.n, spec.d) or velocities.shape != (spec.n, spec.d):
        raise DimensionMismatchError("initial state must be (n, d) positions and velocities")
    if period <= 0:
        raise SchemaError("seed period must be positive", details={"field": "seed.period"})

    momenta = spec.masses[:, None] * velocities
    solution = solve_ivp(
        flat_field(spec, guard=False),
        (0.0, period),
        np.concatenate([positions.ravel(), momenta.ravel()]),
        method="DOP853",
        rtol=1e-12,
        atol=1e-12,
        dense_output=True,
    )
    if not solution.success:
        raise NonFiniteIntegrationError(f"seed integration failed: {solution.message}")

    count = 16 * (2 * spec.K + 1)
    times = np.arange(count) * period / count
    nd = spec.n * spec.d
    samples = solution.sol(times)[:nd].T.reshape(count, spec.n, spec.d)
    samples = samples - np.einsum("i,qid->qd", spec.masses, samples)[:, None, :] / spec.masses.sum()

    mu = spec.period / period
    samples = mu ** (2.0 / 3.0) * samples
    fit_times = np.arange(count) * spec.period / count

    best = None
    for labelling, reverse, candidate in _candidates(samples, spec.n):
        if not np.allclose(spec.masses, spec.masses[list(labelling)]):
            continue
        loop = fit_trig(fit_times, candidate, spec.K, spec.period)
        residual = check_equivariance(loop, spec.group)
        if best is None or residual < best[0] - 1e-12:
            best = (residual, labelling, reverse, loop)

    residual, labelling, reverse, loop = best
    logger.info(
        "seed.initial_state",
        extra={"labelling": labelling, "reversed": reverse, "residual": residual, "scale": mu ** (2.0 / 3.0)},
    )
    return loop
