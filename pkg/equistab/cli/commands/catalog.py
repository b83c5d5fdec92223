import click

from equistab.cli.output import emit_json, format_option


def _cell(value, spec: str) -> str:
    return "-" if value is None else format(value, spec)


@click.command("catalog")
@format_option
@click.pass_obj
def catalog(obj, fmt):
    """List the orbit directory with cached indicators."""
    entries = obj["store"].list()
    if fmt == "json":
        emit_json(entries)
        return
    if not entries:
        click.echo(f"no orbits in {obj['store'].root}")
        return
    click.echo(f"{'name':<20} {'n':>3} {'d':>2} {'action':>12} {'morse':>7} {'max |mult|':>12}")
    for entry in entries:
        ind = entry.indicators
        morse = f"{_cell(ind.morse_fundamental, 'd')}/{_cell(ind.morse_period, 'd')}"
        click.echo(
            f"{entry.name or entry.path:<20} {entry.n:>3} {entry.d:>2} "
            f"{_cell(ind.action, '.4f'):>12} {morse:>7} {_cell(ind.max_multiplier, '.4g'):>12}"
        )
