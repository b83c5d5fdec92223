import json

import click
from pydantic import BaseModel

format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Human-readable text or machine-readable JSON on stdout.",
)


def emit_json(payload) -> None:
    if isinstance(payload, BaseModel):
        click.echo(payload.model_dump_json(indent=2))
    elif isinstance(payload, list) and all(isinstance(p, BaseModel) for p in payload):
        click.echo(json.dumps([p.model_dump(mode="json") for p in payload], indent=2))
    else:
        click.echo(json.dumps(payload, indent=2, default=str))


def parse_eps_zero(_ctx, _param, value: str) -> float | None:
    if value is None or value == "auto":
        return None
    try:
        eps = float(value)
    except ValueError:
        raise click.BadParameter("expected 'auto' or a non-negative number")
    if eps < 0:
        raise click.BadParameter("must be non-negative")
    return eps
