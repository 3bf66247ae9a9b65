"""Deterministic, atomic file output.

JSON is emitted with a fixed layout (two-space indent, trailing newline) and
CSV floats with ``repr`` so that re-emitting loaded data reproduces the file
byte for byte. All writes go through a temp file in the target directory
followed by an atomic rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def dump_json(data, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(data, indent=2) + "\n")


def load_json(path: str | Path):
    with open(path) as handle:
        return json.load(handle)


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def dump_csv(path: str | Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
