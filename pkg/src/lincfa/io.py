"""CSV ingestion and emission, atomic file writes."""

from __future__ import annotations

import csv
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CsvParseError, MissingTargetError, NonFiniteCellError
from .stats import Dataset


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_number(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def load_csv(path, target: str | None = None) -> tuple[Dataset, np.ndarray | None]:
    """Read a headered numeric CSV; split off ``target`` if given.

    Row numbers in errors are 1-based file lines (the header is line 1).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvParseError("file is empty", row=1) from None
        if len(set(header)) != len(header) or any(h == "" for h in header):
            raise CsvParseError(f"header has empty or duplicate names: {header}", row=1)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(c.strip() == "" for c in raw):
                continue
            if len(raw) != len(header):
                raise CsvParseError(f"expected {len(header)} cells, found {len(raw)}", row=lineno)
            vals = []
            for name, cell in zip(header, raw):
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvParseError(f"cannot parse {cell!r} as a number", row=lineno, column=name) from None
                if not math.isfinite(v):
                    raise NonFiniteCellError(f"non-finite value {cell!r}", row=lineno, column=name)
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise CsvParseError("no data rows")
    values = np.array(rows, dtype=float)
    if target is None:
        return Dataset(values, tuple(header)), None
    if target not in header:
        raise MissingTargetError(f"target column {target!r} not in header {header}")
    t = header.index(target)
    keep = [k for k in range(len(header)) if k != t]
    return Dataset(values[:, keep], tuple(header[k] for k in keep)), values[:, t].copy()


def dataset_csv_text(d: Dataset, y=None, target: str = "y") -> str:
    names = list(d.column_names)
    cols = [d.values[:, k] for k in range(d.D)]
    if y is not None:
        names.append(target)
        cols.append(np.asarray(y, dtype=float))
    lines = [",".join(names)]
    for i in range(d.n):
        lines.append(",".join(format_number(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def save_csv(path, d: Dataset, y=None, target: str = "y") -> None:
    """Write ``d`` (and optionally the target) with round-trip exact decimals."""
    atomic_write_text(path, dataset_csv_text(d, y, target))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(float(v))
    return str(v)


def table_text(rows: Iterable[dict], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(_cell(r.get(c, "")) for c in columns))
    return "\n".join(lines) + "\n"


def write_table(path, rows: Iterable[dict], columns: Sequence[str]) -> None:
    atomic_write_text(path, table_text(rows, columns))
