"""Deterministic CSV/JSON writers for fields, measures and run summaries."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .state import Measure, SpinorField, gamma_measure

FIELD_COLUMNS = ("site", "mu", "reL", "imL", "reR", "imR")


def fmt(x: float) -> str:
    """Fixed 17-significant-digit rendering, so identical runs give identical bytes."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag], indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path: Path, obj: Any) -> None:
    path.write_text(dumps(obj), encoding="utf-8")


def field_rows(psi: SpinorField) -> list[list[str]]:
    mu = gamma_measure(psi).values
    rows = []
    for x, m, (l, r) in zip(psi.sites, mu, psi.amplitudes):
        rows.append([str(int(x)), fmt(m), fmt(l.real), fmt(l.imag), fmt(r.real), fmt(r.imag)])
    return rows


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_field(path: Path, psi: SpinorField, fmt_name: str = "csv") -> Path:
    """Write per-site amplitudes and measure; returns the path actually written."""
    rows = field_rows(psi)
    if fmt_name == "json":
        path = path.with_suffix(".json")
        write_json(path, [dict(zip(FIELD_COLUMNS, [int(r[0]), *map(float, r[1:])])) for r in rows])
    else:
        path = path.with_suffix(".csv")
        _write_csv(path, FIELD_COLUMNS, rows)
    return path


def write_measure_series(path: Path, series: Sequence[Measure], fmt_name: str = "csv") -> Path:
    """Write ``(step, site, mu)`` rows for a list of measures indexed by step."""
    if fmt_name == "json":
        path = path.with_suffix(".json")
        write_json(path, [{"step": n, "site": [int(x) for x in mu.sites], "mu": list(mu.values)}
                          for n, mu in enumerate(series)])
        return path
    path = path.with_suffix(".csv")
    rows = ([str(n), str(int(x)), fmt(v)] for n, mu in enumerate(series) for x, v in zip(mu.sites, mu.values))
    _write_csv(path, ("step", "site", "mu"), rows)
    return path


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    def cell(v: Any) -> str:
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return v
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return fmt(v)

    path = path.with_suffix(".csv")
    _write_csv(path, header, ([cell(v) for v in row] for row in rows))
    return path
