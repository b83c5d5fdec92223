import click

from equistab.cli.output import emit_json, format_option
from equistab.core.config import settings
from equistab.schemas.solver import FloquetOptions
from equistab.services.floquet import monodromy, stability_verdict
from equistab.services.orbit_service import resolve
from equistab.services.report_service import floquet_row, render_floquet


@click.command("floquet")
@click.argument("orbit", type=click.Path(dir_okay=False))
@click.option("--steps", type=click.IntRange(min=1), default=None, help="RK4 steps over one period.")
@click.option(
    "--mode",
    type=click.Choice(["analytic", "shooting"]),
    default="analytic",
    show_default=True,
    help="Evaluate the orbit from its series or integrate it alongside the variational equation.",
)
@click.option("--top", type=click.IntRange(min=1), default=6, show_default=True, help="Multipliers to list.")
@format_option
def floquet(orbit, steps, mode, top, fmt):
    """Monodromy matrix and Floquet multipliers of an orbit."""
    resolved = resolve(orbit)
    options = FloquetOptions(mode=mode, steps=steps) if steps else FloquetOptions(mode=mode)
    result = monodromy(resolved.loop, resolved.spec, options)
    row = floquet_row(result, stability_verdict(result, settings.STABILITY_TOL), top=top)

    if fmt == "json":
        emit_json(row)
        return
    click.echo(render_floquet(row))
    click.echo(f"|det X(T) - 1|: {row.det_residual:.3e}")
    for real, imag in row.multipliers:
        click.echo(f"  {real: .6e} {imag:+.6e}i")
