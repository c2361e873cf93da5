"""Formatting and file-writing utilities for multiquant."""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from multiquant.utils.constants import FLOAT_FORMAT


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (round-trip exact)."""
    return format(float(value), FLOAT_FORMAT)


def format_cell(value: Any) -> str:
    """Format one CSV cell; floats get fixed precision, the rest str()."""
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays into plain JSON types."""
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def dumps_json(data: Any) -> str:
    """Serialize to deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with fixed float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def atomic_write_text(path: Path, text: str) -> None:
    """Write text to path via a temporary file and rename.

    Readers never observe a partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
