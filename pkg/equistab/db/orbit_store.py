"""Flat directory of orbit files, one JSON document per orbit."""
import logging
from pathlib import Path

from pydantic import ValidationError

from equistab.core.config import settings
from equistab.core.exceptions import EquistabException, SchemaError
from equistab.schemas.orbit import OrbitFile
from equistab.schemas.report import CatalogEntry
from equistab.services.problem_service import _validation_error, load_json

logger = logging.getLogger(__name__)


def read_orbit(text: str) -> OrbitFile:
    try:
        return OrbitFile.model_validate(load_json(text))
    except ValidationError as e:
        raise _validation_error(e)


def serialize_orbit(orbit: OrbitFile) -> str:
    # pydantic writes the shortest repr that parses back to the same double
    return orbit.model_dump_json(indent=2) + "\n"


class OrbitStore:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root if root is not None else settings.ORBIT_DIR)

    def path_for(self, name: str) -> Path:
        return self.root / f"{name or 'orbit'}.json"

    def save(self, orbit: OrbitFile, path: str | Path | None = None) -> Path:
        """
        Write an orbit file.

        Args:
            orbit: Validated orbit document.
            path: Explicit target; defaults to <root>/<orbit.name>.json.

        Returns:
            The path written.
        """
        target = Path(path) if path is not None else self.path_for(orbit.name)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(serialize_orbit(orbit), encoding="utf-8")
        logger.info("orbit.saved", extra={"path": str(target), "orbit_name": orbit.name})
        return target

    def load(self, path_or_name: str | Path) -> OrbitFile:
        path = Path(path_or_name)
        if not path.exists() and not path.suffix:
            path = self.path_for(str(path_or_name))
        if not path.exists():
            raise SchemaError(f"orbit file '{path}' not found", details={"path": str(path)})
        return read_orbit(path.read_text(encoding="utf-8"))

    def list(self) -> list[CatalogEntry]:
        entries = []
        if not self.root.is_dir():
            return entries
        for path in sorted(self.root.glob("*.json")):
            try:
                orbit = self.load(path)
            except EquistabException as e:
                logger.warning("catalog.skipped", extra={"path": str(path), "error": e.code})
                continue
            entries.append(
                CatalogEntry(
                    path=str(path),
                    name=orbit.name,
                    n=orbit.problem.n,
                    d=orbit.problem.d,
                    representation=orbit.representation,
                    period=orbit.period,
                    indicators=orbit.indicators,
                )
            )
        return entries
