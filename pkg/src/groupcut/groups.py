"""Minimality and extremality for functions on finite cyclic grids.

A finite problem is a function on ``(1/n)Z^d / Z^d`` (d = 1 or 2) with a
designated nonzero group element f.  Minimality is the classical test
(vanishing at the origin, nonnegativity, subadditivity, symmetry); the
extremality test computes the space of perturbations that keep every tight
additivity relation tight, i.e. the kernel of an exact integer linear system.

The kernel engine is exact.  A mod-p elimination (p prime) is used only to
pick candidate independent rows and to certify full column rank early (a
nonzero determinant mod p is nonzero over the integers, so the "kernel is
trivial" fast path is sound); every reported basis vector is then produced by
integer elimination and re-checked against all equations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Optional, Sequence

from .pwl import GridFunction, Pwl1Function, PwlFunction, restrict, restrict1

_MOD_P = 2_147_483_647  # prime, products of two residues fit in int64


@dataclass(frozen=True)
class FiniteProblem:
    """A candidate function on a finite grid group with its point f."""

    dims: int
    n: int
    f_index: tuple[int, ...]
    values: GridFunction

    def __post_init__(self) -> None:
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.values.dims != self.dims or self.values.n != self.n:
            raise ValueError("grid does not match the declared problem shape")
        if len(self.f_index) != self.dims:
            raise ValueError("f_index must have one entry per dimension")
        f = tuple(c % self.n for c in self.f_index)
        if all(c == 0 for c in f):
            raise ValueError("f must be a nonzero group element")
        object.__setattr__(self, "f_index", f)

    @classmethod
    def from_grid(cls, g: GridFunction, f_index: Sequence[int]) -> "FiniteProblem":
        return cls(dims=g.dims, n=g.n, f_index=tuple(f_index), values=g)

    @classmethod
    def from_pwl(cls, pi: PwlFunction, m: int) -> "FiniteProblem":
        fx, fy = pi.f_units()
        return cls(
            dims=2, n=m * pi.q, f_index=(fx * m, fy * m), values=restrict(pi, m)
        )

    @classmethod
    def from_pwl1(cls, pi: Pwl1Function, m: int) -> "FiniteProblem":
        if pi.f is None:
            raise ValueError("function has no designated point f")
        fu = int(pi.f * pi.q)
        return cls(dims=1, n=m * pi.q, f_index=(fu * m,), values=restrict1(pi, m))

    def points(self) -> list[tuple[int, ...]]:
        if self.dims == 2:
            return [(i, j) for i in range(self.n) for j in range(self.n)]
        return [(i,) for i in range(self.n)]

    def flat(self, p: tuple[int, ...]) -> int:
        if self.dims == 2:
            return (p[0] % self.n) * self.n + (p[1] % self.n)
        return p[0] % self.n

    def size(self) -> int:
        return self.n * self.n if self.dims == 2 else self.n

    def value(self, p: tuple[int, ...]) -> Fraction:
        if self.dims == 2:
            return self.values.value_at_units(p[0], p[1])
        return self.values.value_at_units(p[0])

    def _int_table(self) -> tuple[list[int], int]:
        """Values as integer numerators over one common denominator."""
        if self.dims == 2:
            flat_vals = [v for row in self.values.values for v in row]
        else:
            flat_vals = list(self.values.values)
        den = 1
        for v in flat_vals:
            den = lcm(den, v.denominator)
        return [int(v * den) for v in flat_vals], den


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool
    violated: Optional[str] = None
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.minimal


def finite_minimality(p: FiniteProblem) -> MinimalityReport:
    """Check the four minimality conditions, reporting the first violation."""
    n = p.n
    vals, den = p._int_table()
    size = p.size()
    if vals[0] != 0:
        return MinimalityReport(False, "origin", ((0,) * p.dims,))
    for idx, v in enumerate(vals):
        if v < 0:
            pt = (idx // n, idx % n) if p.dims == 2 else (idx,)
            return MinimalityReport(False, "nonnegative", (pt,))
    if p.dims == 2:
        for a in range(size):
            ax, ay = divmod(a, n)
            va = vals[a]
            for b in range(a, size):
                bx, by = divmod(b, n)
                s = ((ax + bx) % n) * n + (ay + by) % n
                if va + vals[b] < vals[s]:
                    return MinimalityReport(
                        False, "subadditive", ((ax, ay), (bx, by))
                    )
        fx, fy = p.f_index
        for a in range(size):
            ax, ay = divmod(a, n)
            s = ((fx - ax) % n) * n + (fy - ay) % n
            if vals[a] + vals[s] != den:
                return MinimalityReport(False, "symmetric", ((ax, ay),))
    else:
        for a in range(n):
            va = vals[a]
            for b in range(a, n):
                if va + vals[b] < vals[(a + b) % n]:
                    return MinimalityReport(False, "subadditive", ((a,), (b,)))
        (fx,) = p.f_index
        for a in range(n):
            if vals[a] + vals[(fx - a) % n] != den:
                return MinimalityReport(False, "symmetric", ((a,),))
    return MinimalityReport(True)


def tight_pairs(p: FiniteProblem) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Unordered pairs (u, v) with pi(u) + pi(v) = pi(u + v)."""
    n = p.n
    vals, _ = p._int_table()
    out = []
    if p.dims == 2:
        size = n * n
        for a in range(size):
            ax, ay = divmod(a, n)
            va = vals[a]
            for b in range(a, size):
                bx, by = divmod(b, n)
                s = ((ax + bx) % n) * n + (ay + by) % n
                if va + vals[b] == vals[s]:
                    out.append(((ax, ay), (bx, by)))
    else:
        for a in range(n):
            for b in range(a, n):
                if vals[a] + vals[b] == vals[(a + b) % n]:
                    out.append(((a,), (b,)))
    return out


@dataclass(frozen=True)
class PerturbationKernel:
    """The space of grid perturbations preserving all tight relations."""

    dimension: int
    basis: tuple[GridFunction, ...]


def extremality_kernel(p: FiniteProblem) -> PerturbationKernel:
    """Kernel of the tight-relation system; trivial iff the function is extreme.

    Requires a minimal input; equations are pi(u) + pi(v) - pi(u+v) = 0 for
    every tight pair, plus the normalizations pi(0) = 0 and pi(f) = 0.
    """
    report = finite_minimality(p)
    if not report.minimal:
        raise ValueError(
            f"extremality kernel needs a minimal function (violates {report.violated})"
        )
    n = p.n
    size = p.size()
    rows: list[dict[int, int]] = [{0: 1}, {p.flat(p.f_index): 1}]
    for u, v in tight_pairs(p):
        s = tuple((a + b) % n for a, b in zip(u, v))
        row: dict[int, int] = {}
        for pt, coef in ((u, 1), (v, 1), (s, -1)):
            idx = p.flat(pt)
            row[idx] = row.get(idx, 0) + coef
        row = {c: v2 for c, v2 in row.items() if v2}
        if row:
            rows.append(row)
    basis = kernel_of_rows(rows, size)
    grids = []
    for vec in basis:
        if p.dims == 2:
            table = tuple(
                tuple(vec[i * n + j] for j in range(n)) for i in range(n)
            )
        else:
            table = tuple(vec)
        grids.append(GridFunction(n=n, dims=p.dims, values=table))
    return PerturbationKernel(dimension=len(grids), basis=tuple(grids))


def nullspace(matrix: Sequence[Sequence[object]]) -> list[list[Fraction]]:
    """A basis of the right kernel of an exact rational matrix."""
    from .lattice import rational

    if not matrix:
        return []
    ncols = len(matrix[0])
    rows: list[dict[int, int]] = []
    for mrow in matrix:
        if len(mrow) != ncols:
            raise ValueError("ragged matrix")
        fracs = [rational(v) for v in mrow]
        den = 1
        for v in fracs:
            den = lcm(den, v.denominator)
        row = {c: int(v * den) for c, v in enumerate(fracs) if v != 0}
        if row:
            rows.append(row)
    return kernel_of_rows(rows, ncols)


# ---------------------------------------------------------------------------
# Exact sparse kernel engine.
# ---------------------------------------------------------------------------


def _dedupe(rows: Iterable[dict[int, int]]) -> list[dict[int, int]]:
    seen = set()
    out = []
    for row in rows:
        key = tuple(sorted(row.items()))
        if key and key not in seen:
            seen.add(key)
            out.append(row)
    return out


def _modp_select(
    rows: list[dict[int, int]], ncols: int
) -> tuple[list[int], bool]:
    """Indices of rows forming a mod-p row basis, and a full-rank flag."""
    import numpy as np

    basis = np.zeros((0, ncols), dtype=np.int64)
    pivcols: list[int] = []
    order: list[int] = []  # basis row index sorted by pivot column
    selected: list[int] = []
    chunk_size = 1024
    for start in range(0, len(rows), chunk_size):
        chunk = rows[start : start + chunk_size]
        a = np.zeros((len(chunk), ncols), dtype=np.int64)
        for ri, row in enumerate(chunk):
            for c, v in row.items():
                a[ri, c] = v % _MOD_P
        for bi in order:
            c = pivcols[bi]
            f = a[:, c] % _MOD_P
            nz = f != 0
            if nz.any():
                a[nz] = (a[nz] - f[nz, None] * basis[bi]) % _MOD_P
        for ri in range(a.shape[0]):
            r = a[ri]
            # Reduce against pivots added after the vectorized pass.
            for bi in order:
                c = pivcols[bi]
                f = int(r[c]) % _MOD_P
                if f:
                    r = (r - f * basis[bi]) % _MOD_P
            nzc = np.nonzero(r)[0]
            if nzc.size == 0:
                continue
            lead = int(nzc[0])
            inv = pow(int(r[lead]), _MOD_P - 2, _MOD_P)
            r = (r * inv) % _MOD_P
            basis = np.vstack([basis, r])
            pivcols.append(lead)
            order = sorted(range(len(pivcols)), key=lambda i: pivcols[i])
            selected.append(start + ri)
            if len(pivcols) == ncols:
                return selected, True
    return selected, False


def _exact_echelon(rows_dense: list[list[int]]) -> dict[int, list[int]]:
    """Forward echelon over Z with gcd-normalized pivot rows."""
    pivots: dict[int, list[int]] = {}
    for row in rows_dense:
        r = row[:]
        while True:
            lead = next((c for c, v in enumerate(r) if v), None)
            if lead is None:
                break
            if lead in pivots:
                piv = pivots[lead]
                a, b = piv[lead], r[lead]
                g = gcd(a, b)
                fa, fb = a // g, b // g
                r = [fa * x - fb * y for x, y in zip(r, piv)]
            else:
                g = 0
                for v in r:
                    g = gcd(g, v)
                if g > 1:
                    r = [v // g for v in r]
                if r[lead] < 0:
                    r = [-v for v in r]
                pivots[lead] = r
                break
    return pivots


def _kernel_basis(pivots: dict[int, list[int]], ncols: int) -> list[list[Fraction]]:
    pivot_cols = sorted(pivots)
    free_cols = [c for c in range(ncols) if c not in pivots]
    if not free_cols:
        return []
    # Express each pivot variable in the free variables, bottom-up.
    expr: dict[int, dict[int, Fraction]] = {}
    for c in reversed(pivot_cols):
        row = pivots[c]
        lead = row[c]
        acc: dict[int, Fraction] = {}
        for j in range(c + 1, ncols):
            v = row[j]
            if not v:
                continue
            if j in expr:
                for fc, fv in expr[j].items():
                    acc[fc] = acc.get(fc, Fraction(0)) + v * fv
            else:
                acc[j] = acc.get(j, Fraction(0)) + Fraction(v)
        expr[c] = {
            fc: -fv / lead for fc, fv in acc.items() if fv != 0
        }
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for c in pivot_cols:
            v = expr[c].get(fc)
            if v:
                vec[c] = v
        basis.append(_normalize_vector(vec))
    return basis


def _normalize_vector(vec: list[Fraction]) -> list[Fraction]:
    den = 1
    for v in vec:
        den = lcm(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return [Fraction(v) for v in ints]


def kernel_of_rows(rows: list[dict[int, int]], ncols: int) -> list[list[Fraction]]:
    """Exact kernel basis of a sparse integer equation system."""
    rows = _dedupe(rows)
    if not rows:
        return [_unit(ncols, c) for c in range(ncols)]
    if len(rows) > 48 and ncols > 16:
        try:
            selected, fullrank = _modp_select(rows, ncols)
        except ImportError:  # pragma: no cover - numpy is a hard dependency
            selected, fullrank = list(range(len(rows))), False
        if fullrank:
            return []
        work = [rows[i] for i in selected]
    else:
        work = rows[:]
    while True:
        dense = [_densify(r, ncols) for r in work]
        pivots = _exact_echelon(dense)
        basis = _kernel_basis(pivots, ncols)
        if not basis:
            return []
        violators = []
        for row in rows:
            for b in basis:
                s = sum(coef * b[c] for c, coef in row.items())
                if s != 0:
                    violators.append(row)
                    break
            if len(violators) >= 64:
                break
        if not violators:
            return basis
        work.extend(violators)


def _densify(row: dict[int, int], ncols: int) -> list[int]:
    out = [0] * ncols
    for c, v in row.items():
        out[c] = v
    return out


def _unit(ncols: int, c: int) -> list[Fraction]:
    vec = [Fraction(0)] * ncols
    vec[c] = Fraction(1)
    return vec
