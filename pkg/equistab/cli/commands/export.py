from pathlib import Path

import click

from equistab.services.export_service import FORMATS, PLANES, export_plot
from equistab.services.orbit_service import resolve


@click.command("export")
@click.argument("orbit", type=click.Path(dir_okay=False))
@click.option("--samples", "Q", type=click.IntRange(min=2), default=256, show_default=True, help="Samples per body.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--plane", type=click.Choice(sorted(PLANES)), default="xy", show_default=True, help="Projection for d = 3.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Target file; stdout when omitted.")
def export(orbit, Q, fmt, plane, out):
    """Sample an orbit as CSV, JSON or an SVG plot."""
    resolved = resolve(orbit)
    data = export_plot(resolved.loop, Q, fmt, plane)
    if out is None:
        click.echo(data.decode("utf-8"), nl=False)
        return
    Path(out).write_bytes(data)
