"""Schema-checked CSV reading."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import SchemaMismatch

SCHEMA_LINE = "# hcrv-schema v1"


def read_table(path):
    """Read a schema-tagged CSV into (columns, list of row dicts).

    The first line must be the schema marker; files that are missing,
    empty, untagged, or header-only raise SchemaMismatch.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaMismatch(f"input file not found: {path}")
    with open(path, newline="") as f:
        first = f.readline().strip()
        if first != SCHEMA_LINE:
            raise SchemaMismatch(
                f"{path}: expected header {SCHEMA_LINE!r}, got {first!r}"
            )
        reader = csv.DictReader(f)
        rows = list(reader)
    if reader.fieldnames is None or not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    return list(reader.fieldnames), rows


def require_columns(path, columns, needed):
    for name in needed:
        if name not in columns:
            raise SchemaMismatch(f"{path}: missing column {name!r}")


def numeric(rows, column):
    return [float(r[column]) for r in rows]
