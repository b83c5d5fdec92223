"""Benchmark orbits, reproduced end to end (slow)."""
import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from equistab.cli.main import EXIT_OK, run_cli
from equistab.schemas.solver import FloquetOptions
from equistab.services.action import euler_lagrange_residual
from equistab.services.export_service import export_plot
from equistab.services.floquet import monodromy
from equistab.services.morse import morse_period
from equistab.services.optimizer import solve_multistart
from equistab.services.orbit_service import resolve
from equistab.services.problem_service import load_problem
from equistab.services.report_service import build_report, compute_morse

FIXTURES = Path(__file__).resolve().parents[3] / "fixtures"
GRID = 256

pytestmark = pytest.mark.slow


def report_for(name: str, **overrides):
    resolved = resolve(FIXTURES / f"{name}.json", **overrides)
    return resolved, build_report(resolved, grid=GRID)


@pytest.fixture(scope="module")
def lagrange():
    return resolve(FIXTURES / "lagrange3.json")


@pytest.fixture(scope="module")
def euler():
    return resolve(FIXTURES / "euler3.json")


@pytest.fixture(scope="module")
def eight():
    return resolve(FIXTURES / "eight3.json")


# ============================================
# Indicator tables
# ============================================

def test_lagrange_triangle():
    _, table = report_for("lagrange3")
    assert table.gradient_norm <= 1e-9
    assert table.action == pytest.approx(1.5 * math.pi * 3 ** (2 / 3), abs=1e-3)
    assert table.action == pytest.approx(9.8022, abs=1e-3)
    assert (table.morse_fundamental.index, table.morse_period.index) == (0, 0)
    assert table.floquet.max_modulus == pytest.approx(85.02, rel=0.05)
    assert table.floquet.det_drift <= 1e-6
    assert table.floquet.pairing_residual <= 1e-2


def test_euler_collinear():
    _, table = report_for("euler3")
    assert table.action == pytest.approx(10.9365, abs=1e-2)
    assert (table.morse_fundamental.index, table.morse_period.index) == (1, 3)
    assert 5.8982e4 / 2 <= table.floquet.max_modulus <= 5.8982e4 * 2
    assert table.floquet.det_drift <= 1e-6


def test_figure_eight():
    _, table = report_for("eight3")
    assert table.gradient_norm <= 1e-9
    assert table.action == pytest.approx(5.8584, abs=1e-2)
    assert (table.morse_fundamental.index, table.morse_period.index) == (0, 2)
    assert table.floquet.max_modulus == pytest.approx(1.0187, abs=0.02)
    assert table.floquet.verdict == "stable"
    assert table.floquet.det_drift <= 1e-6
    assert table.floquet.pairing_residual <= 1e-2


def test_kepler_circle():
    _, table = report_for("kepler2")
    assert 2 * table.action == pytest.approx(2 * math.pi * 3 * 2 ** (-4 / 3), rel=1e-6)


def test_antipodal_three_body_orbit():
    """Seed 0 reaches the antipodal orbit at action 10.4421; its largest multiplier stays near 1."""
    resolved, table = report_for("antipodal3")
    assert resolved.orbit.provenance.seed == 0
    assert table.gradient_norm <= 1e-9
    assert table.action == pytest.approx(10.4421, abs=1e-2)
    assert (table.morse_fundamental.index, table.morse_period.index) == (0, 2)
    assert table.floquet.verdict == "stable"
    assert 1.0 <= table.floquet.max_modulus <= 1.0462 + 0.02
    assert table.floquet.det_drift <= 1e-6
    assert table.floquet.pairing_residual <= 1e-2


# ============================================
# Monodromy accuracy
# ============================================

@pytest.mark.parametrize("orbit", ["euler", "eight"])
def test_monodromy_determinant_and_symplecticity(orbit, request):
    resolved = request.getfixturevalue(orbit)
    result = monodromy(resolved.loop, resolved.spec)
    assert result.det_drift <= 1e-6
    assert result.log_scale == 0.0
    scale = max(1.0, float(np.linalg.norm(result.monodromy, 2))) ** 2
    assert result.symplectic_residual <= 1e-6 * scale


@pytest.mark.parametrize("orbit, rel", [("euler", 1e-3), ("eight", 5e-3)])
def test_floquet_modes_agree(orbit, rel, request):
    resolved = request.getfixturevalue(orbit)
    analytic = monodromy(resolved.loop, resolved.spec, FloquetOptions(steps=4096))
    shooting = monodromy(resolved.loop, resolved.spec, FloquetOptions(steps=4096, mode="shooting"))
    assert shooting.max_modulus == pytest.approx(analytic.max_modulus, rel=rel)


@pytest.mark.parametrize("orbit, rel, abs_tol", [("euler", 1e-5, 0.0), ("eight", 0.0, 1e-4)])
def test_step_doubling_moves_the_largest_multiplier_little(orbit, rel, abs_tol, request):
    resolved = request.getfixturevalue(orbit)
    coarse = monodromy(resolved.loop, resolved.spec, FloquetOptions(steps=4096))
    fine = monodromy(resolved.loop, resolved.spec, FloquetOptions(steps=8192))
    assert fine.max_modulus == pytest.approx(coarse.max_modulus, rel=rel, abs=abs_tol)


def test_floquet_modes_agree_on_lagrange():
    resolved, _ = report_for("lagrange3", K=8, M=64)
    analytic = build_report(resolved, FloquetOptions(steps=4096), grid=64).floquet
    shooting = build_report(resolved, FloquetOptions(steps=4096, mode="shooting"), grid=64).floquet
    assert shooting.max_modulus == pytest.approx(analytic.max_modulus, rel=1e-3)


# ============================================
# Solutions
# ============================================

def test_eight_satisfies_newtons_equations(eight):
    assert euler_lagrange_residual(eight.loop, eight.spec, M=1024) <= 1e-4


def test_eight_is_a_choreography(eight):
    """All three bodies trace the same curve; Q divisible by 3 puts the time shifts on the grid."""
    payload = json.loads(export_plot(eight.loop, 1536, "json"))
    bodies = [np.asarray(points) for points in payload["bodies"]]
    for other in bodies[1:]:
        distances = cdist(bodies[0], other)
        assert max(distances.min(axis=0).max(), distances.min(axis=1).max()) <= 1e-3


def test_random_starts_mostly_converge():
    """At least half of 20 random starts reach a critical point under the half-turn group."""
    _, spec = load_problem(FIXTURES / "lagrange3.json", K=8, M=64)
    results = solve_multistart(spec, list(range(20)))
    converged = [r for r in results if r.converged]
    assert len(converged) >= 10
    assert all(r.report.gradient_norm <= 1e-6 for r in converged)


@pytest.mark.parametrize("orbit, expected", [("lagrange", 0), ("euler", 3), ("eight", 2)])
def test_full_period_index_ignores_eps_zero(orbit, expected, request):
    resolved = request.getfixturevalue(orbit)
    result = morse_period(resolved.loop, resolved.spec, M=2 * GRID)
    scale = float(np.max(np.abs(result.eigenvalues)))
    assert result.index == expected
    for relative in (1e-10, 1e-9, 1e-8, 1e-7, 1e-6):
        assert result.index_at(relative * scale) == expected


def test_indices_are_stable_under_refinement():
    """Counts do not move with M -> 2M or F -> F + 16, and fundamental <= period."""
    resolved, _ = report_for("lagrange3", K=8, M=64)
    coarse = compute_morse(resolved, grid=64)
    fine = compute_morse(resolved, grid=128)
    assert [r.index for r in coarse] == [r.index for r in fine]
    assert coarse[0].index <= coarse[1].index

    refined = resolve(FIXTURES / "lagrange3.json", K=8, M=64, F=resolved.spec.F + 16)
    assert [r.index for r in compute_morse(refined, grid=64)] == [r.index for r in coarse]


def test_solve_is_deterministic(tmp_path, capsys):
    """Two runs with --seed 7 give byte-identical orbit files."""
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / f"{run}.json"
        code = run_cli(["solve", str(FIXTURES / "antipodal3.json"), "--seed", "7", "--modes", "8", "--out", str(out)])
        outputs.append((code, out.read_bytes() if out.exists() else capsys.readouterr().err))
    assert outputs[0] == outputs[1]
    if outputs[0][0] == EXIT_OK:
        assert b'"seed": 7' in outputs[0][1]
