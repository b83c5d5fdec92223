import logging
import sys

import click

from equistab.cli.commands import catalog, export, floquet, morse, report, solve
from equistab.cli.output import emit_json
from equistab.core.config import get_settings
from equistab.core.exceptions import EquistabException
from equistab.core.logging_config import configure_logging
from equistab.db.orbit_store import OrbitStore
from equistab.schemas.report import ErrorOutput

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPUTATION = 2


@click.group(name="equistab")
@click.version_option(get_settings().VERSION, prog_name="equistab")
@click.option("-v", "--verbose", is_flag=True, help="Log progress at INFO level on stderr.")
@click.option("--orbit-dir", type=click.Path(file_okay=False), default=None, help="Orbit directory (ORBIT_DIR).")
@click.pass_context
def cli(ctx, verbose, orbit_dir):
    """Symmetric periodic orbits of the n-body problem and their stability."""
    settings = get_settings()
    configure_logging("INFO" if verbose else settings.LOG_LEVEL)
    ctx.obj = {"store": OrbitStore(orbit_dir)}


# One module per subcommand
cli.add_command(solve.solve)
cli.add_command(floquet.floquet)
cli.add_command(morse.morse)
cli.add_command(report.report)
cli.add_command(export.export)
cli.add_command(catalog.catalog)


def _wants_json(argv: list[str]) -> bool:
    for i, arg in enumerate(argv):
        if arg == "--format=json" or (arg == "--format" and argv[i + 1 : i + 2] == ["json"]):
            return True
    return False


def _fail(code: str, message: str, details: dict, as_json: bool) -> None:
    first_line = message.splitlines()[0] if message else code
    click.echo(f"error[{code}]: {first_line}", err=True)
    if as_json:
        emit_json(ErrorOutput(error=code, message=message, details=details).model_dump(mode="json"))


def run_cli(argv: list[str] | None = None) -> int:
    """
    Run one command and map failures to exit codes.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None.

    Returns:
        0 on success, 1 for usage errors, 2 for computation errors.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = _wants_json(argv)
    try:
        result = cli.main(args=argv, prog_name="equistab", standalone_mode=False)
    except click.UsageError as e:
        if e.ctx is not None:
            click.echo(e.ctx.get_usage(), err=True)
        _fail("Usage", e.format_message(), {}, as_json)
        return EXIT_USAGE
    except (click.ClickException, click.Abort) as e:
        _fail("Usage", getattr(e, "message", "aborted"), {}, as_json)
        return EXIT_USAGE
    except EquistabException as e:
        logger.debug("command.failed", exc_info=True)
        _fail(e.code, e.message, e.details, as_json)
        return EXIT_COMPUTATION
    except Exception as e:
        logger.exception("command.crashed")
        _fail("InternalError", str(e) or type(e).__name__, {}, as_json)
        return EXIT_COMPUTATION
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run_cli())
