"""CSV / JSON serialization of correlation curves."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, TextIO, Union

import numpy as np

from .regression import CorrelationCurve

__all__ = ["curve_to_csv", "curve_to_json", "curve_from_csv", "curve_from_json", "read_curve", "write_curve"]

BASE_COLUMNS = ["tau", "g1_re", "g1_im", "g2"]
ERROR_COLUMNS = ["g1_err", "g2_err"]


def _fmt(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{float(x):.17g}"


def _rows(curve: CorrelationCurve):
    for k in range(len(curve)):
        row = {
            "tau": float(curve.tau[k]),
            "g1_re": float(curve.g1[k].real),
            "g1_im": float(curve.g1[k].imag),
            "g2": None if curve.g2 is None else float(curve.g2[k]),
        }
        if curve.has_errors:
            row["g1_err"] = None if curve.g1_err is None else float(curve.g1_err[k])
            row["g2_err"] = None if curve.g2_err is None else float(curve.g2_err[k])
        yield row


def curve_to_csv(curve: CorrelationCurve) -> str:
    cols = BASE_COLUMNS + (ERROR_COLUMNS if curve.has_errors else [])
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for row in _rows(curve):
        buf.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    return buf.getvalue()


def curve_to_json(curve: CorrelationCurve) -> str:
    # repr of a float is its shortest round-trip form, so values equal the CSV ones
    records = [{k: (None if v is None else float(_fmt(v))) for k, v in row.items()} for row in _rows(curve)]
    return json.dumps(records, indent=1) + "\n"


def _column(values, name):
    arr = np.array([np.nan if v is None else float(v) for v in values])
    if name in ("g2", "g1_err", "g2_err") and np.all(np.isnan(arr)):
        return None
    return arr


def _from_columns(cols: dict) -> CorrelationCurve:
    missing = [c for c in BASE_COLUMNS if c not in cols]
    if missing:
        raise ValueError(f"curve file missing columns {missing}")
    tau = _column(cols["tau"], "tau")
    g1 = _column(cols["g1_re"], "g1_re") + 1j * _column(cols["g1_im"], "g1_im")
    g2 = _column(cols["g2"], "g2")
    g1_err = _column(cols["g1_err"], "g1_err") if "g1_err" in cols else None
    g2_err = _column(cols["g2_err"], "g2_err") if "g2_err" in cols else None
    return CorrelationCurve(tau, g1, g2, float("nan"), g1_err, g2_err, method="file")


def curve_from_csv(text: str) -> CorrelationCurve:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValueError("empty curve file")
    cols: dict[str, list] = {name.strip(): [] for name in reader.fieldnames}
    for row in reader:
        for name, val in row.items():
            if name is None or val is None:
                raise ValueError("ragged CSV row")
            cols[name.strip()].append(float(val))
    return _from_columns(cols)


def curve_from_json(text: str) -> CorrelationCurve:
    records = json.loads(text)
    if not isinstance(records, list) or not records or not all(isinstance(r, dict) for r in records):
        raise ValueError("curve JSON must be a non-empty array of records")
    keys = list(records[0])
    cols = {k: [r.get(k) for r in records] for k in keys}
    return _from_columns(cols)


def read_curve(path: Union[str, Path]) -> CorrelationCurve:
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        return curve_from_json(text)
    return curve_from_csv(text)


def write_curve(curve: CorrelationCurve, dest: Union[str, Path, TextIO, None], fmt: str = "csv") -> None:
    text = curve_to_json(curve) if fmt == "json" else curve_to_csv(curve)
    if dest is None or hasattr(dest, "write"):
        (dest or sys.stdout).write(text)
        return
    Path(dest).write_text(text)
