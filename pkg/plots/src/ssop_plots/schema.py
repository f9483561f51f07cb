"""CSV schema checks with actionable errors."""

from __future__ import annotations

import csv
from pathlib import Path


class SchemaMismatch(ValueError):
    """A CSV does not carry the columns a figure family needs."""


def read_csv(path, required):
    """Rows as dicts; raises SchemaMismatch naming any missing column."""
    path = Path(path)
    if not path.exists():
        raise SchemaMismatch(f"{path}: file does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in required if col not in header]
        if missing:
            raise SchemaMismatch(
                f"{path}: missing column(s) {missing}; found {header}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    return rows


def column(rows, name, cast=float):
    return [cast(row[name]) for row in rows]


def group_by(rows, key):
    out = {}
    for row in rows:
        out.setdefault(row[key], []).append(row)
    return out
