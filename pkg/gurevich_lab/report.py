import csv
import io
import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

from gurevich_lab.exceptions import IoError, StorageError
from gurevich_lab.helpers import normalize_floats, round_significant
from gurevich_lab.storage import StorageManager
from gurevich_lab.stored_artifact import StoredArtifact

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FORMATS = ("json", "csv")


class Report(Dict[str, Any]):
    """Result of one experiment.

    It is a specialized dictionary that provides also attribute style access,
    the dictionary parent permits easy encoding to JSON. Reports are frozen
    once the experiment has finished.

    Keys always present: ``schema_version``, ``name``, ``kind``,
    ``config_hash``, ``results`` and ``tables``.
    """

    def __init__(self, name: str, kind: str, config_hash: str) -> None:
        super().__init__()
        object.__setattr__(self, "_frozen", False)
        self["schema_version"] = SCHEMA_VERSION
        self["name"] = name
        self["kind"] = kind
        self["config_hash"] = config_hash
        self["results"] = {}
        self["tables"] = {}

    def __getattr__(self, name: str) -> Any:
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name)

    def __setitem__(self, key: str, value: Any) -> None:
        if getattr(self, "_frozen", False):
            raise TypeError("Finished reports are immutable")
        dict.__setitem__(self, key, value)

    __setattr__ = __setitem__

    def __delitem__(self, key: str) -> None:
        if getattr(self, "_frozen", False):
            raise TypeError("Finished reports are immutable")
        dict.__delitem__(self, key)

    def set_result(self, key: str, value: Any) -> None:
        if getattr(self, "_frozen", False):
            raise TypeError("Finished reports are immutable")
        self["results"][key] = value

    def add_table(
        self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> None:
        """Attach a table; every row must have one entry per column."""
        if getattr(self, "_frozen", False):
            raise TypeError("Finished reports are immutable")
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"table {name}: row {row!r} does not match {columns!r}")
        self["tables"][name] = {
            "columns": list(columns),
            "rows": [list(row) for row in rows],
        }

    def _freeze(self) -> None:
        object.__setattr__(self, "_frozen", True)

    def _thaw(self) -> None:
        object.__setattr__(self, "_frozen", False)

    def to_json(self) -> str:
        """Canonical JSON: floats at 12 significant digits, sorted keys."""
        payload = _encode(normalize_floats(dict(self)))
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def table_csv(self, name: str) -> str:
        table = self["tables"][name]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table["columns"])
        for row in table["rows"]:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()


def _encode(data: Any) -> Any:
    """Non-finite floats become the strings ``inf``, ``-inf`` and ``nan``."""
    if isinstance(data, float) and not math.isfinite(data):
        return repr(data)
    if isinstance(data, dict):
        return {key: _encode(value) for key, value in data.items()}
    if isinstance(data, list):
        return [_encode(value) for value in data]
    return data


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(round_significant(value))
    return str(value)


def emit_report(
    report: Report,
    format: str = "json",
    upload_storage: Optional[str] = None,
) -> List[StoredArtifact]:
    """Store the report (and, for ``csv``, one file per table).

    Artifacts are named ``<name>.json`` and ``<name>.<table>.csv`` inside the
    selected storage.

    Raises:
        ValueError: On an unknown format.
        IoError: When the storage rejects an upload.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown report format {format!r}, expected one of {FORMATS}")
    documents = [(f"{report.name}.json", report.to_json(), "application/json")]
    if format == "csv":
        for table in sorted(report.tables):
            documents.append(
                (f"{report.name}.{table}.csv", report.table_csv(table), "text/csv")
            )
    stored = []
    for object_name, text, content_type in documents:
        try:
            stored.append(
                StorageManager.save_artifact(
                    object_name,
                    text.encode("utf-8"),
                    upload_storage=upload_storage,
                    content_type=content_type,
                )
            )
        except StorageError:
            raise
        except Exception as exc:  # libcloud and OS errors alike
            raise IoError(f"could not store {object_name}: {exc}")
        logger.info("stored %s", object_name)
    return stored
