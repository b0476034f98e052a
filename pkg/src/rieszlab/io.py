"""Reading problem files and writing canonical JSON documents."""

from __future__ import annotations

import json
import math
from fractions import Fraction

from .exactalg import SparsePoly, as_rational


class ProblemError(ValueError):
    """A problem file is malformed; the message names the offending field or line."""


def load_document(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ProblemError(f"{path}: top level must be an object")
    return doc


def parse_rational(value, where: str) -> Fraction:
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ProblemError(f"field {where}: {value!r} is not a rational") from exc


def parse_real(value, where: str):
    """A rational when possible, otherwise a float (for real exponents such as 0.7)."""
    if isinstance(value, float):
        return value
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError):
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"field {where}: {value!r} is not a number") from exc


def parse_vector(value, where: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise ProblemError(f"field {where}: expected a list")
    return tuple(parse_rational(v, f"{where}[{i}]") for i, v in enumerate(value))


def parse_matrix(value, where: str = "matrix") -> list[list[Fraction]]:
    """Either {"rows", "cols", "entries"} (row-major) or a list of rows."""
    if isinstance(value, dict):
        for key in ("rows", "cols", "entries"):
            if key not in value:
                raise ProblemError(f"field {where}.{key} is missing")
        rows, cols, entries = value["rows"], value["cols"], value["entries"]
        if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
            raise ProblemError(f"field {where}: rows and cols must be positive integers")
        if not isinstance(entries, list) or len(entries) != rows * cols:
            raise ProblemError(f"field {where}.entries: expected {rows * cols} entries")
        flat = [parse_rational(v, f"{where}.entries[{i}]") for i, v in enumerate(entries)]
        return [flat[r * cols:(r + 1) * cols] for r in range(rows)]
    if isinstance(value, list) and value and all(isinstance(r, list) for r in value):
        M = [list(parse_vector(r, f"{where}[{i}]")) for i, r in enumerate(value)]
        if len({len(r) for r in M}) != 1:
            raise ProblemError(f"field {where}: rows have different lengths")
        return M
    raise ProblemError(f"field {where}: expected a matrix object or a list of rows")


def parse_polynomial(value, where: str = "polynomial") -> SparsePoly:
    if not isinstance(value, dict) or "variables" not in value or "terms" not in value:
        raise ProblemError(f"field {where}: expected an object with variables and terms")
    names = value["variables"]
    terms = {}
    for i, t in enumerate(value["terms"]):
        try:
            exp = tuple(int(e) for e in t["exponent"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError(f"field {where}.terms[{i}].exponent is invalid") from exc
        if len(exp) != len(names):
            raise ProblemError(f"field {where}.terms[{i}].exponent has the wrong length")
        c = parse_rational(t.get("coefficient"), f"{where}.terms[{i}].coefficient")
        terms[exp] = terms.get(exp, Fraction(0)) + c
    return SparsePoly(names, terms)


def matrix_document(M) -> dict:
    from .exactalg import rational_str

    return {"rows": len(M), "cols": len(M[0]), "entries": [rational_str(as_rational(v)) for row in M for v in row]}


def canonical(obj):
    """Floats to 12 significant digits, non-finite floats to strings, tuples to lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
        return float(f"{obj:.12g}")
    if isinstance(obj, Fraction):
        from .exactalg import rational_str

        return rational_str(obj)
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return canonical(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(canonical(doc), sort_keys=True, indent=2) + "\n"
