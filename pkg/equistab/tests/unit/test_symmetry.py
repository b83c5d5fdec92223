import math
from fractions import Fraction

import numpy as np
import pytest

from equistab.core.exceptions import (
    DimensionMismatchError,
    DiscontinuousUnfoldError,
    GroupNotClosedError,
    InconsistentTauError,
    MassOrbitMismatchError,
    NonOrthogonalRhoError,
)
from equistab.services.dynamics import make_spec
from equistab.services.loops import FundamentalPath, TrigLoop
from equistab.services.seeds import lagrange_loop
from equistab.services.symmetry import (
    GroupElement,
    TimeAction,
    act_on_configuration,
    build_group,
    check_equivariance,
    coefficient_action,
    cyclic,
    dihedral,
    equivariance_projector,
    restrict,
    time_block,
    unfold,
)
from equistab.utils.permutations import from_cycles, identity


def rotation(angle: float) -> np.ndarray:
    return np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])


def antipodal(n: int = 3) -> GroupElement:
    """rho = -Id, sigma = (), tau = half-period shift."""
    return GroupElement(-np.eye(2), identity(n), TimeAction.rotation(Fraction(1, 2)), name="r")


def figure_eight_generators() -> list[GroupElement]:
    r = GroupElement(np.eye(2), from_cycles("(1,2,3)", 3), name="r")
    s = GroupElement(-np.eye(2), from_cycles("(2,3)", 3), name="s")
    return dihedral(r, s)


# ============================================
# TimeAction
# ============================================

def test_time_action_fraction_is_reduced_mod_one():
    """Fractions are stored in lowest terms in [0, 1)."""
    tau = TimeAction.rotation(Fraction(5, 4))
    assert tau.fraction == Fraction(1, 4)
    assert TimeAction.rotation(0).is_identity


def test_time_action_compose_and_inverse():
    """A reflection composed with itself is the identity; rotations add."""
    reflection = TimeAction.reflection(Fraction(1, 3))
    assert reflection.compose(reflection).is_identity
    quarter = TimeAction.rotation(Fraction(1, 4))
    assert quarter.compose(quarter) == TimeAction.rotation(Fraction(1, 2))
    assert quarter.compose(quarter.inverse()).is_identity


# ============================================
# build_group
# ============================================

def test_no_generators_is_trivial_group():
    """No generators: order 1, l = 1, T = pi."""
    group = build_group([], n=2, d=2)
    assert group.order == 1
    assert group.quotient_order == 1
    assert group.period == pytest.approx(math.pi)
    assert group.coset_reps[0].is_identity


def test_antipodal_generator_gives_order_two():
    """rho = -Id with a half-period shift: |G| = 2, ker tau = {Id}, T = 2 pi."""
    group = build_group([antipodal()])
    assert group.order == 2
    assert len(group.kernel_tau) == 1
    assert group.quotient_order == 2
    assert group.period == pytest.approx(2 * math.pi)
    assert group.coset_reps[0].is_identity
    assert group.coset_reps[1].tau == TimeAction.rotation(Fraction(1, 2))


def test_kernel_generator_enlarges_kernel():
    """A pentagonal kernel element and an antipodal shift: |ker tau| = 5, l = 2, |G| = 10."""
    kappa = GroupElement(rotation(2 * math.pi / 5), from_cycles("(1,2,3,4,5)(6,7,8,9,10)", 10), name="kappa")
    group = build_group([kappa, antipodal(10)])
    assert len(group.kernel_tau) == 5
    assert group.quotient_order == 2
    assert group.order == 10


def test_group_is_closed_and_has_inverses():
    """Every product and inverse of elements is found among the elements."""
    group = build_group(figure_eight_generators())
    assert group.order == 6
    assert group.quotient_order == 6
    for g in group.elements:
        assert any(g.inverse().matches(h) for h in group.elements)
        for h in group.elements:
            assert any(g.compose(h).matches(e) for e in group.elements)


def test_non_orthogonal_rho_rejected():
    """A shear is not orthogonal."""
    shear = GroupElement(np.array([[1.0, 0.1], [0.0, 1.0]]), identity(2), TimeAction.rotation(Fraction(1, 2)))
    with pytest.raises(NonOrthogonalRhoError):
        build_group([shear])


def test_irrational_rotation_exceeds_cap():
    """Rotation by one radian never closes."""
    g = GroupElement(rotation(1.0), identity(2))
    with pytest.raises(GroupNotClosedError):
        build_group([g], cap=50)


def test_pure_time_rotation_is_inconsistent():
    """rho = -Id with a third-period shift forces r^2 = (Id, (), 2/3)."""
    r = GroupElement(-np.eye(2), identity(3), TimeAction.rotation(Fraction(1, 3)))
    with pytest.raises(InconsistentTauError):
        build_group([r])


def test_unequal_masses_rejected():
    """sigma = (1,2) with masses [1, 2]."""
    swap = GroupElement(np.eye(2), from_cycles("(1,2)", 2), TimeAction.rotation(Fraction(1, 2)))
    with pytest.raises(MassOrbitMismatchError):
        build_group([swap], masses=[1.0, 2.0])


def test_cyclic_preset_uses_order_modulo_kernel():
    """The preset assigns tau(r) = 1/m with m the order of r."""
    r = GroupElement(np.eye(2), from_cycles("(1,2,3)", 3), name="r")
    generators = cyclic(r)
    assert generators[-1].tau == TimeAction.rotation(Fraction(1, 3))
    assert build_group(generators).quotient_order == 3


def test_describe_lists_generators():
    """The description names rho, sigma and tau of each generator."""
    lines = build_group([antipodal()]).describe()
    assert lines[0] == "ker tau = <Id>, Gbar = <r>"
    assert "rho(r) = -Id" in lines[1]
    assert "sigma(r) = ()" in lines[1]


# ============================================
# Actions
# ============================================

def test_identity_action_leaves_configuration():
    """Identity element, any configuration."""
    c = np.array([[0.3, -1.2], [2.0, 0.5]])
    e = GroupElement(np.eye(2), identity(2))
    np.testing.assert_array_equal(act_on_configuration(e, c), c)


def test_sign_flip_action():
    """rho = -Id, sigma = ()."""
    g = GroupElement(-np.eye(2), identity(2))
    result = act_on_configuration(g, np.array([[1.0, 0.0], [-1.0, 0.0]]))
    np.testing.assert_array_equal(result, [[-1.0, 0.0], [1.0, 0.0]])


def test_row_swap_action():
    """rho = Id, sigma = (1,2)."""
    g = GroupElement(np.eye(2), from_cycles("(1,2)", 2))
    result = act_on_configuration(g, np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_array_equal(result, [[0.0, 1.0], [1.0, 0.0]])


def test_action_dimension_mismatch():
    """Three bodies against a two-body element."""
    g = GroupElement(np.eye(2), identity(2))
    with pytest.raises(DimensionMismatchError):
        act_on_configuration(g, np.zeros((3, 2)))


def test_half_period_shift_negates_first_mode():
    """Time rotation by T/2 maps the k = 1 pair (a, b) to (-a, -b)."""
    block = time_block(TimeAction.rotation(Fraction(1, 2)), K=1)
    np.testing.assert_allclose(block, np.diag([1.0, -1.0, -1.0]), atol=1e-15)


def test_coefficient_action_of_identity():
    """The identity acts as the identity matrix."""
    spec = make_spec([1.0, 1.0], 2, K=3)
    L = coefficient_action(spec.group.elements[0], spec)
    np.testing.assert_array_equal(L, np.eye(7 * 4))


def test_coefficient_action_matches_loop_action():
    """coefficients(g.x) = L_g coefficients(x) for every element of the eight group."""
    spec = make_spec([1.0, 1.0, 1.0], 2, figure_eight_generators(), K=4)
    rng = np.random.default_rng(3)
    loop = TrigLoop(rng.standard_normal((9, 3, 2)), spec.period)
    times = loop.grid(40)
    for g in spec.group.elements:
        moved = TrigLoop.from_flat(coefficient_action(g, spec) @ loop.flat(), 4, 3, 2, spec.period)
        expected = act_on_configuration(g, loop.positions(g.tau.inverse().apply(times, spec.period)))
        np.testing.assert_allclose(moved.positions(times), expected, atol=1e-12)


# ============================================
# Projector
# ============================================

def test_trivial_group_projector_is_identity():
    """Without symmetry or centre-of-mass constraint P = I."""
    spec = make_spec([1.0, 1.0], 2, K=2)
    basis = equivariance_projector(spec.group, spec, center_of_mass=False)
    np.testing.assert_allclose(basis.projector, np.eye(20), atol=1e-14)
    assert basis.rank == 20
    np.testing.assert_allclose(basis.basis.T @ basis.basis, np.eye(20), atol=1e-12)


def test_antipodal_projector_removes_constant_mode():
    """Averaging forces a0 = -a0."""
    spec = make_spec([1.0, 1.0, 1.0], 2, [antipodal()], K=4)
    P = equivariance_projector(spec.group, spec).projector
    np.testing.assert_allclose(P[:6], 0.0, atol=1e-14)


@pytest.mark.parametrize("generators", [[antipodal()], figure_eight_generators()])
def test_projector_is_orthogonal_idempotent(generators):
    """P^2 = P, P^T = P and P L_g = P."""
    spec = make_spec([1.0, 1.0, 1.0], 2, generators, K=5)
    P = equivariance_projector(spec.group, spec).projector
    rng = np.random.default_rng(0)
    for _ in range(100):
        v = rng.standard_normal(P.shape[0])
        assert np.max(np.abs(P @ (P @ v) - P @ v)) <= 1e-10
    np.testing.assert_allclose(P, P.T, atol=1e-12)
    for g in spec.group.elements:
        assert np.max(np.abs(P @ coefficient_action(g, spec) - P)) <= 1e-10


# ============================================
# check_equivariance
# ============================================

def test_trivial_group_residual_is_zero():
    """Any loop is equivariant under the trivial group."""
    spec = make_spec([1.0, 1.0], 2, K=3)
    loop = TrigLoop(np.random.default_rng(1).standard_normal((7, 2, 2)), spec.period)
    assert check_equivariance(loop, spec.group) == 0.0


def test_projected_loop_is_equivariant_and_perturbation_is_not():
    """B z is equivariant; bumping the forbidden constant mode breaks it."""
    spec = make_spec([1.0, 1.0, 1.0], 2, figure_eight_generators(), K=6)
    B = equivariance_projector(spec.group, spec).basis
    z = np.random.default_rng(2).standard_normal(B.shape[1])
    loop = TrigLoop.from_flat(B @ z, spec.K, 3, 2, spec.period)
    assert check_equivariance(loop, spec.group) <= 1e-10

    coefficients = loop.coefficients.copy()
    coefficients[0, 0, 0] += 0.1
    assert check_equivariance(TrigLoop(coefficients, spec.period), spec.group) > 1e-3


# ============================================
# unfold / restrict
# ============================================

def test_lagrange_path_unfolds_to_equivariant_loop():
    """The restricted Lagrange orbit unfolds close to the circular orbit."""
    spec = make_spec([1.0, 1.0, 1.0], 2, [antipodal()], K=8)
    loop = lagrange_loop(spec)
    path = restrict(loop, spec.group, F=16)
    np.testing.assert_allclose(path.x0, loop.positions([0.0])[0], atol=1e-14)
    np.testing.assert_allclose(path.x1, loop.positions([math.pi])[0], atol=1e-14)

    unfolded = unfold(path, spec.group, K=8)
    assert check_equivariance(unfolded, spec.group) <= 1e-9
    np.testing.assert_allclose(unfolded.coefficients, loop.coefficients, atol=1e-2)


def test_restrict_then_unfold_converges_at_second_order():
    """The sine tail of a smooth loop decays like F^-3, so positions recover like F^-2."""
    spec = make_spec([1.0, 1.0, 1.0], 2, [antipodal()], K=8)
    loop = lagrange_loop(spec)
    errors = [
        float(np.max(np.abs(unfold(restrict(loop, spec.group, F=F), spec.group, K=8).coefficients - loop.coefficients)))
        for F in (16, 32)
    ]
    assert errors[0] <= 5e-3
    assert errors[1] < errors[0] / 2


@pytest.mark.parametrize("seed", range(5))
def test_random_admissible_path_unfolds_equivariantly(seed: int):
    """x1 = -x0 makes the path admissible for the antipodal group."""
    spec = make_spec([1.0, 1.0, 1.0], 2, [antipodal()], K=8)
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal((3, 2))
    path = FundamentalPath(x0, -x0, 0.1 * rng.standard_normal((4, 3, 2)))
    assert check_equivariance(unfold(path, spec.group), spec.group) <= 1e-8


def test_inadmissible_path_is_discontinuous():
    """x1 != -x0 leaves a jump at t = pi."""
    spec = make_spec([1.0, 1.0, 1.0], 2, [antipodal()], K=8)
    x0 = np.array([[1.0, 0.0], [-0.5, 0.5], [-0.5, -0.5]])
    path = FundamentalPath(x0, x0, np.zeros((2, 3, 2)))
    with pytest.raises(DiscontinuousUnfoldError):
        unfold(path, spec.group)
