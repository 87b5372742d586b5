"""Readers for the documented CSV schemas of the estimation CLI."""
from __future__ import annotations

import csv
import sys


class SchemaError(Exception):
    """An input file does not match the documented schema."""


def read_csv_records(path, required: tuple[str, ...]) -> list[dict]:
    """Rows of a headered CSV; raises SchemaError naming any missing column."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in required:
                if col not in header:
                    raise SchemaError(f"{path}: missing required column {col!r}")
            return list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def read_grid(path):
    """A dense comma-separated float matrix (one grid row per line)."""
    import numpy as np

    try:
        return np.loadtxt(path, delimiter=",")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path}: not a numeric grid: {exc}") from exc


def run_main(fn) -> int:
    """Shared error trampoline for the script entry points."""
    try:
        fn()
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
