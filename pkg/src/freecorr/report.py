"""Deterministic serialization of reports (JSON, CSV, plain tables)."""

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1"


def _float_token(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_plain(obj):
    """Convert numpy/Fraction/dataclass-ish values to JSON-ready builtins.

    Fractions become "p/q" strings ("3" when integral); dict key order is preserved.
    """
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, indent=2):
    """JSON text with floats at 17 significant digits and fixed key order."""
    out = io.StringIO()
    _write(to_plain(obj), out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _write(v, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, val) in enumerate(v.items()):
            out.write(f'{pad}{_string(k)}: ')
            _write(val, out, indent, level + 1)
            out.write(",\n" if i < len(v) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(v, list):
        if not v:
            out.write("[]")
            return
        if all(not isinstance(x, (dict, list)) for x in v):
            out.write("[" + ", ".join(_scalar(x) for x in v) + "]")
            return
        out.write("[\n")
        for i, val in enumerate(v):
            out.write(pad)
            _write(val, out, indent, level + 1)
            out.write(",\n" if i < len(v) - 1 else "\n")
        out.write(end + "]")
    else:
        out.write(_scalar(v))


def _string(s):
    import json

    return json.dumps(s)


def _scalar(x):
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return _float_token(x)
    return _string(str(x))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(c) for c in row])
    return buf.getvalue()


def _csv_cell(c):
    if isinstance(c, (float, np.floating)):
        return _float_token(float(c)).strip('"')
    if isinstance(c, Fraction):
        return str(c)
    return c


def table_text(header, rows):
    cells = [[str(_csv_cell(c)) for c in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


@dataclass
class VerificationReport:
    """Outcome of checking one claim: {claim, parameters, deviation, tolerance, pass}."""

    claim: str
    parameters: dict
    deviation: float
    tolerance: float
    passed: bool = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.deviation <= self.tolerance)

    def to_json(self):
        out = {
            "claim": self.claim,
            "parameters": self.parameters,
            "deviation": float(self.deviation),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
        }
        if self.details:
            out["details"] = self.details
        return out
