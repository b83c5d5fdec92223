import click

from equistab.cli.output import emit_json, format_option, parse_eps_zero
from equistab.schemas.solver import FloquetOptions
from equistab.services.orbit_service import resolve
from equistab.services.report_service import build_report, indicators_of, render_text


@click.command("report")
@click.argument("orbit", type=click.Path(dir_okay=False))
@click.option("--steps", type=click.IntRange(min=1), default=None, help="RK4 steps for the monodromy.")
@click.option("--grid", "M", type=click.IntRange(min=8), default=None, help="Grid size for the full-period Morse count.")
@click.option("--eps-zero", default="auto", show_default=True, callback=parse_eps_zero)
@click.option("--save", is_flag=True, help="Write the indicators back into the orbit file.")
@format_option
@click.pass_obj
def report(obj, orbit, steps, M, eps_zero, save, fmt):
    """Benchmark table row: group, action, Morse indices, largest multiplier."""
    resolved = resolve(orbit)
    options = FloquetOptions(steps=steps) if steps else None
    table = build_report(resolved, options, grid=M, eps_zero=eps_zero)

    if save:
        updated = resolved.orbit.model_copy(update={"indicators": indicators_of(table)})
        obj["store"].save(updated, resolved.path)

    if fmt == "json":
        emit_json(table)
        return
    click.echo(render_text(table))
