"""Continuous piecewise linear functions over the standard triangulation.

A function is stored by its values on the vertices ``(i/q, j/q)`` of one
period; it is extended to the plane by affine interpolation on each face of
``P_q`` and by periodicity modulo ``Z^2``.  Values are exact rationals.
One-dimensional functions (period 1, breakpoints in ``(1/q)Z``) get the same
treatment with intervals instead of triangles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .lattice import (
    Face,
    FaceKind,
    LatticePoint,
    face_containing,
    rational,
)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _mod1(x: Fraction) -> Fraction:
    return x - _floor(x)


@dataclass(frozen=True)
class PwlFunction:
    """A Z^2-periodic continuous function, affine on each face of P_q."""

    q: int
    values: tuple[tuple[Fraction, ...], ...]  # values[i][j] = pi(i/q, j/q)
    f: Optional[LatticePoint] = None

    @classmethod
    def from_values(
        cls,
        q: int,
        values: Sequence[Sequence[object]],
        f: object = None,
        minimal_candidate: bool = False,
    ) -> "PwlFunction":
        if not isinstance(q, int) or q < 1:
            raise ValueError(f"q must be a positive integer, got {q!r}")
        if len(values) != q or any(len(row) != q for row in values):
            raise ValueError(f"values must be a {q}x{q} array")
        table = tuple(tuple(rational(v) for v in row) for row in values)
        f_point: Optional[LatticePoint] = None
        if f is not None:
            if isinstance(f, LatticePoint):
                f_point = f
            else:
                fx, fy = f  # type: ignore[misc]
                f_point = LatticePoint.of(fx, fy)
            fu = f_point.units(q)  # raises if f is not a vertex of P_q
            if fu[0] % q == 0 and fu[1] % q == 0:
                raise ValueError("f must not be a lattice point of Z^2")
        if minimal_candidate:
            if table[0][0] != 0:
                raise ValueError("a minimal candidate must vanish at the origin")
            if any(v < 0 or v > 1 for row in table for v in row):
                raise ValueError("minimal candidate values must lie in [0, 1]")
            if f_point is None:
                raise ValueError("a minimal candidate needs its point f")
        return cls(q=q, values=table, f=f_point)

    def value_at_units(self, ux: int, uy: int) -> Fraction:
        return self.values[ux % self.q][uy % self.q]

    def f_units(self) -> tuple[int, int]:
        if self.f is None:
            raise ValueError("function has no designated point f")
        fx, fy = self.f.units(self.q)
        return fx % self.q, fy % self.q


def evaluate(pi: PwlFunction, p: LatticePoint) -> Fraction:
    """Evaluate at any rational point (reduced modulo Z^2)."""
    x = _mod1(p.x)
    y = _mod1(p.y)
    q = pi.q
    face = face_containing(LatticePoint(x, y), q)
    a, b = face.ax, face.ay
    fx = x * q - a
    fy = y * q - b
    v = pi.value_at_units
    kind = face.kind
    if kind is FaceKind.POINT:
        return v(a, b)
    if kind is FaceKind.EDGE_H:
        return (1 - fx) * v(a, b) + fx * v(a + 1, b)
    if kind is FaceKind.EDGE_V:
        return (1 - fy) * v(a, b) + fy * v(a, b + 1)
    if kind is FaceKind.EDGE_D:
        return fx * v(a + 1, b) + fy * v(a, b + 1)
    if kind is FaceKind.TRI_LOWER:
        return (1 - fx - fy) * v(a, b) + fx * v(a + 1, b) + fy * v(a, b + 1)
    return (
        (1 - fy) * v(a + 1, b)
        + (1 - fx) * v(a, b + 1)
        + (fx + fy - 1) * v(a + 1, b + 1)
    )


def delta_sigma(
    pi: PwlFunction,
    sigma: Sequence[int],
    x1: LatticePoint,
    x2: LatticePoint,
    x3: LatticePoint,
) -> Fraction:
    """The signed sum sigma_1 pi(x1) + sigma_2 pi(x2) + sigma_3 pi(x3)."""
    if len(sigma) != 3 or any(s not in (-1, 1) for s in sigma):
        raise ValueError(f"sigma must be three signs, got {sigma!r}")
    return (
        sigma[0] * evaluate(pi, x1)
        + sigma[1] * evaluate(pi, x2)
        + sigma[2] * evaluate(pi, x3)
    )


@dataclass(frozen=True)
class GridFunction:
    """A function on the finite grid (1/n)Z^d / Z^d, d in {1, 2}."""

    n: int
    dims: int
    values: tuple  # dims=2: values[i][j] = g(i/n, j/n); dims=1: values[i] = g(i/n)

    @classmethod
    def from_values(cls, n: int, dims: int, values) -> "GridFunction":
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        if dims == 2:
            if len(values) != n or any(len(row) != n for row in values):
                raise ValueError(f"values must be a {n}x{n} array")
            table = tuple(tuple(rational(v) for v in row) for row in values)
        elif dims == 1:
            if len(values) != n:
                raise ValueError(f"values must have length {n}")
            table = tuple(rational(v) for v in values)
        else:
            raise ValueError("dims must be 1 or 2")
        return cls(n=n, dims=dims, values=table)

    def value_at_units(self, ux: int, uy: Optional[int] = None) -> Fraction:
        if self.dims == 2:
            if uy is None:
                raise ValueError("two indices needed for a 2d grid function")
            return self.values[ux % self.n][uy % self.n]
        return self.values[ux % self.n]

    def is_zero(self) -> bool:
        if self.dims == 2:
            return all(v == 0 for row in self.values for v in row)
        return all(v == 0 for v in self.values)

    def scaled(self, c: Fraction) -> "GridFunction":
        if self.dims == 2:
            vals = tuple(tuple(c * v for v in row) for row in self.values)
        else:
            vals = tuple(c * v for v in self.values)
        return GridFunction(self.n, self.dims, vals)

    def combined(self, other: "GridFunction", coeff: Fraction) -> "GridFunction":
        """self + coeff * other, pointwise."""
        if (self.n, self.dims) != (other.n, other.dims):
            raise ValueError("grid mismatch")
        if self.dims == 2:
            vals = tuple(
                tuple(a + coeff * b for a, b in zip(ra, rb))
                for ra, rb in zip(self.values, other.values)
            )
        else:
            vals = tuple(a + coeff * b for a, b in zip(self.values, other.values))
        return GridFunction(self.n, self.dims, vals)

    def max_abs(self) -> Fraction:
        if self.dims == 2:
            return max((abs(v) for row in self.values for v in row), default=Fraction(0))
        return max((abs(v) for v in self.values), default=Fraction(0))


def restrict(pi: PwlFunction, m: int) -> GridFunction:
    """Restrict to the refined grid (1/(mq))Z^2."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    n = m * pi.q
    vals = tuple(
        tuple(evaluate(pi, LatticePoint(Fraction(i, n), Fraction(j, n))) for j in range(n))
        for i in range(n)
    )
    return GridFunction(n=n, dims=2, values=vals)


def interpolate(g: GridFunction, f: Optional[LatticePoint] = None) -> PwlFunction:
    """The continuous interpolation of a 2d grid function over P_n."""
    if g.dims != 2:
        raise ValueError("interpolate expects a 2d grid function")
    return PwlFunction(q=g.n, values=g.values, f=f)


def decompose(
    fn: Callable[[LatticePoint], Fraction], q: int
) -> tuple[PwlFunction, Callable[[LatticePoint], Fraction]]:
    """Split a periodic function into its P_q interpolant plus a residual.

    The interpolant agrees with fn on the vertices of P_q; the residual is
    fn minus the interpolant, hence vanishes on all vertices.
    """
    vals = tuple(
        tuple(rational(fn(LatticePoint(Fraction(i, q), Fraction(j, q)))) for j in range(q))
        for i in range(q)
    )
    pwl = PwlFunction(q=q, values=vals, f=None)

    def residual(p: LatticePoint) -> Fraction:
        return fn(p) - evaluate(pwl, p)

    return pwl, residual


# ---------------------------------------------------------------------------
# One-dimensional functions.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pwl1Function:
    """A Z-periodic continuous function, affine between breakpoints i/q."""

    q: int
    values: tuple[Fraction, ...]  # values[i] = pi(i/q)
    f: Optional[Fraction] = None

    @classmethod
    def from_values(
        cls,
        q: int,
        values: Sequence[object],
        f: object = None,
        minimal_candidate: bool = False,
    ) -> "Pwl1Function":
        if not isinstance(q, int) or q < 1:
            raise ValueError(f"q must be a positive integer, got {q!r}")
        if len(values) != q:
            raise ValueError(f"values must have length {q}")
        table = tuple(rational(v) for v in values)
        f_val: Optional[Fraction] = None
        if f is not None:
            f_val = rational(f)
            if (f_val * q).denominator != 1:
                raise ValueError("f must be a breakpoint i/q")
            if f_val.denominator == 1:
                raise ValueError("f must not be an integer")
        if minimal_candidate:
            if table[0] != 0:
                raise ValueError("a minimal candidate must vanish at the origin")
            if any(v < 0 or v > 1 for v in table):
                raise ValueError("minimal candidate values must lie in [0, 1]")
            if f_val is None:
                raise ValueError("a minimal candidate needs its point f")
        return cls(q=q, values=table, f=f_val)

    def value_at_units(self, u: int) -> Fraction:
        return self.values[u % self.q]


def evaluate1(pi: Pwl1Function, x: Fraction) -> Fraction:
    t = _mod1(rational(x)) * pi.q
    i = _floor(t)
    frac = t - i
    if frac == 0:
        return pi.value_at_units(i)
    return (1 - frac) * pi.value_at_units(i) + frac * pi.value_at_units(i + 1)


def restrict1(pi: Pwl1Function, m: int) -> GridFunction:
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    n = m * pi.q
    vals = tuple(evaluate1(pi, Fraction(i, n)) for i in range(n))
    return GridFunction(n=n, dims=1, values=vals)
