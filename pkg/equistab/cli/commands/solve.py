import click

from equistab.cli.output import emit_json, format_option
from equistab.schemas.solver import RefineOptions
from equistab.services.orbit_service import orbit_to_file, solve_problem
from equistab.services.problem_service import load_problem


@click.command("solve")
@click.argument("problem", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="First random seed (random starts only).")
@click.option("--starts", type=click.IntRange(min=1), default=1, show_default=True, help="Number of random starts.")
@click.option("--tol", type=click.FloatRange(min=0, min_open=True), default=None, help="Newton gradient tolerance.")
@click.option("--modes", "K", type=click.IntRange(min=1), default=None, help="Override the number of Fourier modes K.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Orbit file to write.")
@format_option
@click.pass_obj
def solve(obj, problem, seed, starts, tol, K, out, fmt):
    """
    Find a symmetric periodic orbit for a problem file.

    The orbit is written to --out, or to <orbit dir>/<name>.json.
    """
    problem_file, spec = load_problem(problem, K=K)
    loop, report = solve_problem(problem_file, spec, seed=seed, starts=starts, tol=tol)
    refine = RefineOptions(tol=tol) if tol is not None else None
    orbit = orbit_to_file(problem_file, spec, loop, report, refine=refine)
    path = obj["store"].save(orbit, out)

    if fmt == "json":
        emit_json({"path": str(path), "indicators": orbit.indicators.model_dump(mode="json")})
        return
    click.echo(f"orbit written to {path}")
    click.echo(f"action: {report.action_value:.6f}")
    click.echo(f"gradient norm: {report.gradient_norm:.3e}")
    click.echo(f"iterations: {report.iterations}")
