"""JSON document format for functions, verdicts, and certificates.

A function document is a JSON object with a ``kind`` discriminator:

* ``pwl2``: periodic piecewise linear on P_q; fields ``q``, ``f`` (pair of
  fraction strings), ``values`` a q by q matrix with ``values[i][j]`` the
  value at (i/q, j/q).
* ``pwl1``: one-row variant; fields ``q``, ``f`` (fraction string),
  ``values`` a flat list of q entries.
* ``grid2``: a bare function on the n by n group grid; fields ``n``,
  optional ``f``, ``values`` n by n.
* ``grid1``: one-row grid; fields ``n``, optional ``f``, ``values`` flat.

All numbers are exact fraction strings like "2/5"; plain integers are
accepted as shorthand.  Decimal literals are rejected, as floats cannot
round-trip exact arithmetic.  An optional ``name`` tags the function.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .lattice import rational
from .pwl import GridFunction, Pwl1Function, PwlFunction

__all__ = [
    "DocumentError",
    "ParsedFunction",
    "parse_fraction",
    "format_fraction",
    "parse_function_document",
    "function_to_document",
    "grid_to_document",
]


class DocumentError(ValueError):
    """The document does not describe a valid function."""


def parse_fraction(value: object) -> Fraction:
    if isinstance(value, float):
        raise DocumentError(
            f"decimal {value!r} rejected: use fraction strings like \"1/3\""
        )
    try:
        return rational(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad fraction {value!r}: {exc}") from exc


def format_fraction(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class ParsedFunction:
    """A validated function document, ready for the solvers."""

    kind: str
    fn: Union[PwlFunction, Pwl1Function, GridFunction]
    f: Optional[tuple[Fraction, ...]]
    name: Optional[str] = None

    def f_index(self) -> tuple[int, ...]:
        """f in grid units, for the finite group problem."""
        if self.f is None:
            raise DocumentError("this operation needs the document's f")
        if self.kind == "pwl2":
            return self.fn.f_units()
        if self.kind == "pwl1":
            u = self.f[0] * self.fn.q
            if u.denominator != 1:
                raise DocumentError(
                    f"f = {self.f[0]} is not a breakpoint at q = {self.fn.q}"
                )
            return (int(u) % self.fn.q,)
        n = self.fn.n
        idx = []
        for c in self.f:
            u = c * n
            if u.denominator != 1:
                raise DocumentError(
                    f"f component {c} is not a grid point at level {n}"
                )
            idx.append(int(u) % n)
        return tuple(idx)


def _parse_f(raw: object, arity: int) -> tuple[Fraction, ...]:
    if arity == 1 and isinstance(raw, (str, int)):
        return (parse_fraction(raw),)
    if not isinstance(raw, (list, tuple)) or len(raw) != arity:
        raise DocumentError(f"f must have {arity} component(s), got {raw!r}")
    return tuple(parse_fraction(c) for c in raw)


def _parse_matrix(raw: object, rows: int, cols: int) -> list[list[Fraction]]:
    if not isinstance(raw, list) or len(raw) != rows:
        raise DocumentError(f"values must be a {rows}x{cols} matrix")
    out = []
    for row in raw:
        if not isinstance(row, list) or len(row) != cols:
            raise DocumentError(f"values must be a {rows}x{cols} matrix")
        out.append([parse_fraction(v) for v in row])
    return out


def _parse_vector(raw: object, size: int) -> list[Fraction]:
    if not isinstance(raw, list) or len(raw) != size:
        raise DocumentError(f"values must be a list of {size} entries")
    return [parse_fraction(v) for v in raw]


def _require_positive_int(doc: dict, key: str) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise DocumentError(f"{key} must be a positive integer, got {value!r}")
    return value


def parse_function_document(doc: object) -> ParsedFunction:
    if not isinstance(doc, dict):
        raise DocumentError("a function document must be a JSON object")
    kind = doc.get("kind")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise DocumentError("name must be a string")
    try:
        if kind == "pwl2":
            q = _require_positive_int(doc, "q")
            f = _parse_f(doc.get("f"), 2)
            values = _parse_matrix(doc.get("values"), q, q)
            fn = PwlFunction.from_values(q, values, f=f)
            return ParsedFunction("pwl2", fn, f, name)
        if kind == "pwl1":
            q = _require_positive_int(doc, "q")
            f = _parse_f(doc.get("f"), 1)
            values = _parse_vector(doc.get("values"), q)
            fn = Pwl1Function.from_values(q, values, f=f[0])
            return ParsedFunction("pwl1", fn, f, name)
        if kind == "grid2":
            n = _require_positive_int(doc, "n")
            f = _parse_f(doc["f"], 2) if doc.get("f") is not None else None
            values = _parse_matrix(doc.get("values"), n, n)
            fn = GridFunction.from_values(n, 2, values)
            return ParsedFunction("grid2", fn, f, name)
        if kind == "grid1":
            n = _require_positive_int(doc, "n")
            f = _parse_f(doc["f"], 1) if doc.get("f") is not None else None
            values = _parse_vector(doc.get("values"), n)
            fn = GridFunction.from_values(n, 1, values)
            return ParsedFunction("grid1", fn, f, name)
    except DocumentError:
        raise
    except (ValueError, TypeError) as exc:
        raise DocumentError(str(exc)) from exc
    raise DocumentError(
        f"kind must be one of pwl2, pwl1, grid2, grid1; got {kind!r}"
    )


def function_to_document(parsed: ParsedFunction) -> dict:
    doc: dict = {"kind": parsed.kind}
    if parsed.name is not None:
        doc["name"] = parsed.name
    fn = parsed.fn
    if parsed.kind == "pwl2":
        doc["q"] = fn.q
        doc["values"] = [
            [format_fraction(v) for v in row] for row in fn.values
        ]
    elif parsed.kind == "pwl1":
        doc["q"] = fn.q
        doc["values"] = [format_fraction(v) for v in fn.values]
    elif parsed.kind == "grid2":
        doc["n"] = fn.n
        doc["values"] = [
            [format_fraction(v) for v in row] for row in fn.values
        ]
    else:
        doc["n"] = fn.n
        doc["values"] = [format_fraction(v) for v in fn.values]
    if parsed.f is not None:
        if len(parsed.f) == 1:
            doc["f"] = format_fraction(parsed.f[0])
        else:
            doc["f"] = [format_fraction(c) for c in parsed.f]
    return doc


def grid_to_document(g: GridFunction, name: Optional[str] = None) -> dict:
    """Serialize a bare grid function (certificates, kernel vectors)."""
    kind = "grid2" if g.dims == 2 else "grid1"
    doc: dict = {"kind": kind, "n": g.n}
    if name is not None:
        doc["name"] = name
    if g.dims == 2:
        doc["values"] = [[format_fraction(v) for v in row] for row in g.values]
    else:
        doc["values"] = [format_fraction(v) for v in g.values]
    return doc
