"""Static plot data for function documents: CSV dumps and SVG heatmaps.

CSV layout: plain matrix of fraction strings, one row per y breakpoint in
ascending order, columns by x, so the file reads like the printed value
matrix of the function.  Periodic piecewise linear functions are dumped on
the closed grid (q + 1 rows and columns, the last repeating the first by
periodicity); bare grid functions are dumped natively (n by n).  One-row
functions produce a single-row CSV.

SVG output is self-contained (no external assets): a grayscale heatmap for
two-dimensional data, a polyline graph for one-dimensional data.  The
tight-pair density plot counts, for every group element, how many tight
subadditivity relations it participates in.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .documents import DocumentError, ParsedFunction, format_fraction
from .groups import FiniteProblem, tight_pairs

__all__ = ["values_csv", "values_svg", "density_svg"]


def _closed_matrix(parsed: ParsedFunction) -> list[list[Fraction]]:
    """Rows indexed by y ascending, columns by x."""
    fn = parsed.fn
    if parsed.kind == "pwl2":
        q = fn.q
        return [
            [fn.value_at_units(i, j) for i in range(q + 1)]
            for j in range(q + 1)
        ]
    if parsed.kind == "grid2":
        n = fn.n
        return [[fn.value_at_units(i, j) for i in range(n)] for j in range(n)]
    raise DocumentError(f"no matrix form for kind {parsed.kind!r}")


def _closed_vector(parsed: ParsedFunction) -> list[Fraction]:
    fn = parsed.fn
    if parsed.kind == "pwl1":
        return [fn.value_at_units(i) for i in range(fn.q + 1)]
    if parsed.kind == "grid1":
        return [fn.value_at_units(i) for i in range(fn.n)]
    raise DocumentError(f"no vector form for kind {parsed.kind!r}")


def values_csv(parsed: ParsedFunction) -> str:
    if parsed.kind in ("pwl2", "grid2"):
        rows = _closed_matrix(parsed)
    else:
        rows = [_closed_vector(parsed)]
    lines = [",".join(format_fraction(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _heatmap_svg(matrix: Sequence[Sequence[Fraction]], title: str) -> str:
    """Grayscale heatmap; row j is drawn at height j from the bottom."""
    rows = len(matrix)
    cols = len(matrix[0])
    cell = max(4, 480 // max(rows, cols))
    width = cols * cell
    height = rows * cell
    flat = [v for row in matrix for v in row]
    lo, hi = min(flat), max(flat)
    span = hi - lo
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<title>{title}</title>",
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for j, row in enumerate(matrix):
        y = (rows - 1 - j) * cell
        for i, v in enumerate(row):
            t = float((v - lo) / span) if span else 0.0
            shade = round(255 * (1 - t))
            parts.append(
                f'<rect x="{i * cell}" y="{y}" width="{cell}" '
                f'height="{cell}" fill="rgb({shade},{shade},{shade})"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _polyline_svg(values: Sequence[Fraction], title: str) -> str:
    width, height, pad = 480, 160, 10
    lo, hi = min(values), max(values)
    span = hi - lo
    n = len(values)
    points = []
    for i, v in enumerate(values):
        x = pad + (width - 2 * pad) * i / max(n - 1, 1)
        t = float((v - lo) / span) if span else 0.5
        y = height - pad - (height - 2 * pad) * t
        points.append(f"{x:.2f},{y:.2f}")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f"<title>{title}</title>\n"
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="black"/>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1.5" '
        f'points="{" ".join(points)}"/>\n'
        "</svg>\n"
    )


def values_svg(parsed: ParsedFunction) -> str:
    name = parsed.name or "function values"
    if parsed.kind in ("pwl2", "grid2"):
        return _heatmap_svg(_closed_matrix(parsed), name)
    return _polyline_svg(_closed_vector(parsed), name)


def _density_problem(parsed: ParsedFunction) -> FiniteProblem:
    if parsed.f is None:
        raise DocumentError("tight-pair density needs the document's f")
    if parsed.kind == "pwl2":
        return FiniteProblem.from_pwl(parsed.fn, 1)
    if parsed.kind == "pwl1":
        return FiniteProblem.from_pwl1(parsed.fn, 1)
    return FiniteProblem.from_grid(parsed.fn, parsed.f_index())


def density_svg(parsed: ParsedFunction) -> str:
    """Heatmap of how many tight relations each group element appears in."""
    problem = _density_problem(parsed)
    n = problem.n
    name = parsed.name or "function"
    title = f"tight-pair density of {name}"
    if problem.dims == 2:
        counts = [[0 for _ in range(n)] for _ in range(n)]
        for u, v in tight_pairs(problem):
            counts[u[1]][u[0]] += 1
            counts[v[1]][v[0]] += 1
        matrix = [[Fraction(c) for c in row] for row in counts]
        return _heatmap_svg(matrix, title)
    line = [0 for _ in range(n)]
    for u, v in tight_pairs(problem):
        line[u[0]] += 1
        line[v[0]] += 1
    return _polyline_svg([Fraction(c) for c in line], title)
