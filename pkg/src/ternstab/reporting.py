"""Canonical JSON and CSV emission.

JSON output has sorted keys, two-space indentation and every float written
with 17 significant digits, so identical reports give identical bytes and
floats round-trip exactly. Non-finite floats are written as the strings
``"+inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from .errors import OutputError


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"+inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def _encode(obj, indent: int, out: list) -> None:
    obj = _plain(obj)
    pad = "  " * indent
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted((str(k), v) for k, v in obj.items())
        for n, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _encode(v, indent + 1, out)
            out.append(",\n" if n < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for n, v in enumerate(obj):
            out.append(pad + "  ")
            _encode(v, indent + 1, out)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj) -> str:
    out = []
    _encode(obj, 0, out)
    out.append("\n")
    return "".join(out)


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v).strip('"')
    return str(v)


def canonical_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _write(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def emit_report(report, fmt: str, path) -> str:
    """Write ``report`` (anything with ``to_dict`` / ``csv_rows``) as json or csv."""
    if fmt == "json":
        _write(path, canonical_json(report.to_dict()))
    elif fmt == "csv":
        header, rows = report.csv_rows()
        _write(path, canonical_csv(header, rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return os.fspath(path)


def load_report(path):
    """Parse a canonical JSON report, turning infinity markers back into floats."""
    def fix(v):
        if v == "+inf":
            return math.inf
        if v == "-inf":
            return -math.inf
        if v == "nan":
            return math.nan
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, list):
            return [fix(x) for x in v]
        return v

    with open(path, encoding="utf-8") as fh:
        return fix(json.load(fh))
