"""Reading the experiment CSVs: comment-header aware, schema-checked."""

from __future__ import annotations

import csv
from pathlib import Path


class SchemaError(ValueError):
    pass


def read_table(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    """Parse a CSV with leading '#' comment lines into a list of row dicts.

    All `required` columns must be present (extra columns are kept); numeric
    fields are converted to float lazily by the callers, since some columns
    (e.g. branch labels) are strings.
    """
    lines = [
        ln for ln in Path(path).read_text().splitlines()
        if ln and not ln.startswith("#")
    ]
    if not lines:
        raise SchemaError(f"{path}: no data")
    reader = csv.DictReader(lines)
    missing = set(required) - set(reader.fieldnames or ())
    if missing:
        raise SchemaError(
            f"{path}: missing columns {sorted(missing)} "
            f"(found {reader.fieldnames})"
        )
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: header only, no rows")
    return rows


def column(rows: list[dict], name: str) -> list[float]:
    return [float(r[name]) for r in rows]
