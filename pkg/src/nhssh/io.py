"""CSV / JSON writers for result tables.

Floats are written with 17 significant digits so values round-trip exactly.
Complex values are split into re_<name> / im_<name> columns.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def flatten(record: dict) -> dict:
    out = {}
    for key, val in record.items():
        if isinstance(val, (complex, np.complexfloating)):
            out[f"re_{key}"] = float(np.real(val))
            out[f"im_{key}"] = float(np.imag(val))
        elif isinstance(val, np.generic):
            out[key] = val.item()
        else:
            out[key] = val
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def to_csv(records, columns, meta: dict | None = None) -> str:
    """CSV text.  With `meta`, a single leading '# meta: {...}' line carries
    the configuration (read back with e.g. pandas.read_csv(comment="#"))."""
    buf = io.StringIO()
    if meta is not None:
        buf.write("# meta: " + _json_value(meta) + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for rec in records:
        rec = flatten(rec)
        wr.writerow([_cell(rec.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(v) -> str:
    # hand-rolled so floats carry exactly 17 significant digits
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return "null"
        return _fmt_float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return _json_value({"re": float(np.real(v)), "im": float(np.imag(v))})
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(records, meta: dict, columns=None) -> str:
    data = [flatten(r) for r in records]
    if columns is not None:
        data = [{c: r.get(c) for c in columns} for r in data]
    meta = dict(meta)
    meta.setdefault("version", __version__)
    return "{\n\"meta\": " + _json_value(meta) + ",\n\"data\": " + _json_value(data) + "\n}\n"


def emit(records, fmt: str, path: str | None, columns, meta: dict | None = None) -> str:
    """Write `records` as CSV or JSON to `path` ('-' or None means stdout).

    Returns the text written.  I/O errors are re-raised with the path named.
    """
    records = list(records)
    if fmt == "csv":
        text = to_csv(records, columns, meta)
    elif fmt == "json":
        text = to_json(records, meta or {}, columns)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
