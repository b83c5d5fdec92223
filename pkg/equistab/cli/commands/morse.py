import click

from equistab.cli.output import emit_json, format_option, parse_eps_zero
from equistab.services.orbit_service import resolve
from equistab.services.report_service import compute_morse, morse_row, render_morse


@click.command("morse")
@click.argument("orbit", type=click.Path(dir_okay=False))
@click.option(
    "--domain",
    type=click.Choice(["fundamental", "period", "both"]),
    default="both",
    show_default=True,
)
@click.option("--grid", "M", type=click.IntRange(min=8), default=None, help="Grid size for the full-period count.")
@click.option("--eps-zero", default="auto", show_default=True, callback=parse_eps_zero, help="Zero-eigenvalue threshold.")
@format_option
def morse(orbit, domain, M, eps_zero, fmt):
    """Discrete Morse indices of an orbit."""
    resolved = resolve(orbit)
    rows = [morse_row(result) for result in compute_morse(resolved, domain, grid=M, eps_zero=eps_zero)]

    if fmt == "json":
        emit_json(rows)
        return
    for row in rows:
        click.echo(render_morse(row))
