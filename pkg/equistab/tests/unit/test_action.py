import math
from fractions import Fraction

import numpy as np
import pytest

from equistab.core.exceptions import CollisionalPathError, DimensionMismatchError
from equistab.services.action import (
    ReducedAction,
    action_full,
    action_fundamental,
    action_points,
    euler_lagrange_residual,
    grad_action,
    grad_action_full,
    grad_action_fundamental,
    grad_action_points,
    hess_action,
    hess_action_full,
    hess_action_fundamental,
    hess_action_points,
    polish_points,
    virial_ratio,
)
from equistab.services.dynamics import make_spec
from equistab.services.loops import FundamentalPath, SampledLoop, TrigLoop
from equistab.services.seeds import kepler_loop, lagrange_loop
from equistab.services.symmetry import GroupElement, TimeAction, coefficient_action, cyclic, dihedral, restrict, unfold
from equistab.utils.permutations import from_cycles, identity

LAGRANGE_FULL_ACTION = 3 * math.pi * 3 ** (2 / 3)
KEPLER_FULL_ACTION = 2 * math.pi * 3 * 2 ** (-4 / 3)


def half_turn(n: int) -> list[GroupElement]:
    return cyclic(GroupElement(-np.eye(2), identity(n), TimeAction.rotation(Fraction(1, 2))))


def finite_difference(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    out = np.zeros(x.size)
    for i in range(x.size):
        step = np.zeros(x.size)
        step[i] = h
        out[i] = (f(x + step) - f(x - step)) / (2 * h)
    return out


@pytest.fixture
def lagrange():
    spec = make_spec([1.0, 1.0, 1.0], 2, half_turn(3), K=8, M=64)
    return spec, lagrange_loop(spec)


@pytest.fixture
def wobbly():
    """A non-critical three-body loop with separated bodies (trivial group, period pi)."""
    rng = np.random.default_rng(3)
    spec = make_spec([1.0, 2.0, 1.5], 2, K=3, M=16, F=3)
    coefficients = 0.05 * rng.standard_normal((7, 3, 2))
    coefficients[0] = [[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]]
    return spec, TrigLoop(coefficients, spec.period)


# ============================================
# Closed-form values
# ============================================

def test_lagrange_full_period_action(lagrange):
    """A = 3 pi 3^(2/3) for the unit-mass triangle turning once in 2 pi."""
    spec, loop = lagrange
    assert action_full(loop, spec) == pytest.approx(LAGRANGE_FULL_ACTION, rel=1e-10)


def test_kepler_full_period_action():
    spec = make_spec([1.0, 1.0], 2, half_turn(2), K=4, M=32)
    assert action_full(kepler_loop(spec), spec) == pytest.approx(KEPLER_FULL_ACTION, rel=1e-10)


def test_static_pair_on_fundamental_domain():
    """Kinetic part vanishes, U = 1 for 0 <= t <= pi."""
    spec = make_spec([1.0, 1.0], 2, M=16, F=2)
    x = np.array([[-0.5, 0.0], [0.5, 0.0]])
    path = FundamentalPath(x, x, np.zeros((2, 2, 2)))
    assert action_fundamental(path, spec) == pytest.approx(math.pi, rel=1e-14)


def test_static_pair_pointwise():
    spec = make_spec([1.0, 1.0], 2, M=16)
    samples = np.tile(np.array([[-0.5, 0.0], [0.5, 0.0]]), (16, 1, 1))
    assert action_points(SampledLoop(samples, 2 * math.pi), spec) == pytest.approx(2 * math.pi, rel=1e-14)


def test_relative_equilibrium_is_critical(lagrange):
    spec, loop = lagrange
    assert euler_lagrange_residual(loop, spec) < 1e-10
    assert virial_ratio(loop, spec) == pytest.approx(1.0, rel=1e-10)
    assert np.linalg.norm(grad_action_full(loop, spec)) < 1e-10


def test_pointwise_action_converges_at_second_order(lagrange):
    """Errors of f1 against the exact action shrink fourfold when M doubles."""
    spec, loop = lagrange
    errors = [abs(action_points(loop.sample(M), spec) - LAGRANGE_FULL_ACTION) for M in (32, 64, 128)]
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=1e-2)
    assert errors[1] / errors[2] == pytest.approx(4.0, rel=1e-2)


def test_action_is_invariant_under_the_group():
    """A(g.x) = A(x) and f1(g.x) = f1(x) for a loop that is not itself equivariant."""
    r = GroupElement(np.eye(2), from_cycles("(1,2,3)", 3), name="r")
    s = GroupElement(-np.eye(2), from_cycles("(2,3)", 3), name="s")
    spec = make_spec([1.0, 1.0, 1.0], 2, dihedral(r, s), K=4, M=48)
    rng = np.random.default_rng(5)
    coefficients = 0.05 * rng.standard_normal((9, 3, 2))
    coefficients[0] = [[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]]
    loop = TrigLoop(coefficients, spec.period)

    full, points = action_full(loop, spec), action_points(loop.sample(48), spec)
    for g in spec.group.elements:
        moved = TrigLoop.from_flat(coefficient_action(g, spec) @ loop.flat(), spec.K, 3, 2, spec.period)
        assert action_full(moved, spec) == pytest.approx(full, rel=1e-9)
        assert action_points(moved.sample(48), spec) == pytest.approx(points, rel=1e-9)


def test_unfolded_path_has_l_times_the_fundamental_action():
    """l f2(path) = A(unfold(path)) up to the truncation of the joint kinks."""
    spec = make_spec([1.0, 1.0, 1.0], 2, half_turn(3), K=8, M=1024)
    path = restrict(lagrange_loop(spec), spec.group, F=64)
    unfolded = unfold(path, spec.group, K=128)
    assert spec.l * action_fundamental(path, spec) == pytest.approx(action_full(unfolded, spec), rel=1e-6)


# ============================================
# Derivatives against finite differences
# ============================================

def test_full_period_gradient(wobbly):
    spec, loop = wobbly
    expected = finite_difference(
        lambda v: action_full(TrigLoop.from_flat(v, loop.K, 3, 2, loop.period), spec), loop.flat()
    )
    np.testing.assert_allclose(grad_action_full(loop, spec), expected, rtol=1e-5, atol=1e-7)


def test_full_period_hessian(wobbly):
    spec, loop = wobbly
    expected = np.stack(
        [
            finite_difference(
                lambda v: grad_action_full(TrigLoop.from_flat(v, loop.K, 3, 2, loop.period), spec)[i],
                loop.flat(),
            )
            for i in range(loop.flat().size)
        ]
    )
    np.testing.assert_allclose(hess_action_full(loop, spec), expected, rtol=1e-5, atol=1e-6)


def test_fundamental_gradient_and_hessian(wobbly):
    spec, _ = wobbly
    rng = np.random.default_rng(5)
    x0 = np.array([[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]])
    path = FundamentalPath(x0, x0 + 0.1, 0.05 * rng.standard_normal((3, 3, 2)))

    def as_path(v):
        return FundamentalPath.from_flat(v, 3, 3, 2)

    gradient = grad_action_fundamental(path, spec)
    expected = finite_difference(lambda v: action_fundamental(as_path(v), spec), path.flat())
    np.testing.assert_allclose(gradient, expected, rtol=1e-5, atol=1e-7)

    H = hess_action_fundamental(path, spec)
    column = finite_difference(lambda v: grad_action_fundamental(as_path(v), spec)[4], path.flat())
    np.testing.assert_allclose(H[4], column, rtol=1e-5, atol=1e-6)


def test_pointwise_gradient_and_hessian(wobbly):
    spec, loop = wobbly
    sample = loop.sample(12)

    def as_sample(v):
        return SampledLoop.from_flat(v, 12, 3, 2, loop.period)

    expected = finite_difference(lambda v: action_points(as_sample(v), spec), sample.flat())
    np.testing.assert_allclose(grad_action_points(sample, spec), expected, rtol=1e-5, atol=1e-7)

    H = hess_action_points(sample, spec)
    row = finite_difference(lambda v: grad_action_points(as_sample(v), spec)[7], sample.flat())
    np.testing.assert_allclose(H[7], row, rtol=1e-5, atol=1e-6)


def test_kinetic_only_pointwise_hessian_has_constant_nullspace():
    """Without the potential, the kernel is the n*d constant loops."""
    spec = make_spec([1.0, 1.0], 2)
    sample = SampledLoop(np.zeros((8, 2, 2)), 2 * math.pi)
    eigenvalues = np.linalg.eigvalsh(hess_action_points(sample, spec, potential_off=True))
    assert np.count_nonzero(np.abs(eigenvalues) < 1e-9) == 4
    assert np.all(eigenvalues > -1e-9)


# ============================================
# Reduced coordinates
# ============================================

def test_reduced_action_is_fundamental_convention(lagrange):
    """f(z) = A(Bz) / l."""
    spec, loop = lagrange
    reduced = ReducedAction(spec)
    z = reduced.coordinates(loop)
    assert reduced.value(z) == pytest.approx(LAGRANGE_FULL_ACTION / 2, rel=1e-10)
    assert np.linalg.norm(reduced.gradient(z)) < 1e-10
    np.testing.assert_allclose(reduced.loop(z).coefficients, loop.coefficients, atol=1e-12)


def test_reduced_gradient_and_hessian(lagrange):
    spec, loop = lagrange
    reduced = ReducedAction(spec)
    rng = np.random.default_rng(11)
    z = reduced.coordinates(loop) + 0.01 * rng.standard_normal(reduced.dimension)

    np.testing.assert_allclose(
        reduced.gradient(z), finite_difference(reduced.value, z), rtol=1e-5, atol=1e-7
    )
    value, gradient = reduced.value_and_gradient(z)
    assert value == pytest.approx(reduced.value(z), rel=1e-14)

    H = reduced.hessian(z)
    np.testing.assert_allclose(H[0], finite_difference(lambda v: reduced.gradient(v)[0], z), rtol=1e-5, atol=1e-6)
    np.testing.assert_allclose(H, H.T, atol=1e-12)


def test_dispatch_on_representation(wobbly):
    spec, loop = wobbly
    np.testing.assert_array_equal(grad_action(loop, spec), grad_action_full(loop, spec))
    sample = loop.sample(10)
    np.testing.assert_array_equal(hess_action(sample, spec), hess_action_points(sample, spec))


def test_dimension_mismatch(wobbly):
    spec, _ = wobbly
    with pytest.raises(DimensionMismatchError):
        action_full(TrigLoop(np.zeros((3, 2, 2)), spec.period), spec)


def test_collisional_path_is_rejected():
    spec = make_spec([1.0, 1.0], 2, K=1, M=16)
    coefficients = np.zeros((3, 2, 2))
    coefficients[1] = [[1.0, 0.0], [-1.0, 0.0]]
    with pytest.raises(CollisionalPathError):
        action_full(TrigLoop(coefficients, spec.period), spec)


def test_polish_points_reduces_gradient(lagrange):
    spec, loop = lagrange
    sample = loop.sample(32)
    before = float(np.linalg.norm(grad_action_points(sample, spec)))
    polished, after = polish_points(sample, spec)
    assert after <= before
    assert after < 1e-8
    assert polished.M == 32
