from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Set

import numpy as np
from pydantic import BaseModel


def format_value(value: Any) -> str:
    """
    Locale-independent text for one CSV cell.

    Floats use Python's shortest round-trip repr (never more than 17
    significant digits), ints print as ints, None prints as an empty cell.
    """
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def render_models_csv(models: Sequence[BaseModel], header: Sequence[str]) -> str:
    """One CSV row per model, columns taken from the model fields named in `header`."""
    return render_csv(header, ([getattr(m, name) for name in header] for m in models))


def render_json(model: BaseModel, exclude: Optional[Set[str]] = None) -> str:
    """Indented JSON with keys in field order."""
    return model.model_dump_json(indent=2, exclude=exclude) + "\n"


def emit(text: str, out: Optional[Path], stream) -> None:
    """Writes `text` to `out` as UTF-8 with LF endings, or to `stream` when no path is given."""
    if out is None:
        stream.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
