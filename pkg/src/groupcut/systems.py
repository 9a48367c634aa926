"""Finite systems of functional equations on the unit interval.

A system couples ``ell`` unknown functions ``f(., 1), ..., f(., ell)`` on
``[0, 1]`` through equations

    Delta_k f(x) = sum_i a_i f(x, i) + sum_j b_j f(1 - x, j) = 0,

one family per k, required for all x.  These arise from edge-supported
additivity relations: each unknown tracks a perturbation along one edge,
parametrized from its base vertex, and reflected occurrences enter through
``1 - x``.  Solutions vanishing at the endpoints are determined by their
values on ``{1/m, (m-1)/m}``: the equations are affine in x on the pieces of
the common breakpoint set, so vanishing at the two interior sample points
forces vanishing everywhere once endpoint values are pinned to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Mapping, Sequence, Union

from .groups import kernel_of_rows
from .lattice import (
    Face,
    FaceKind,
    canonical_mod_lattice,
    rational,
)
from .tuples import SevenTuple, classify_kinds, vertex_triples

TermList = tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class SystemEquation:
    """One equation: plain terms use f(x, slot), reflected use f(1-x, slot)."""

    plain: TermList
    reflected: TermList

    def __post_init__(self) -> None:
        for terms in (self.plain, self.reflected):
            for slot, coeff in terms:
                if not isinstance(slot, int) or slot < 0:
                    raise ValueError(f"bad slot {slot!r}")
                if not isinstance(coeff, Fraction) or coeff == 0:
                    raise ValueError(f"bad coefficient {coeff!r}")


@dataclass(frozen=True)
class SystemSpec:
    """A finite functional-equation system over ell unknown functions."""

    ell: int
    equations: tuple[SystemEquation, ...]

    def __post_init__(self) -> None:
        if self.ell < 0:
            raise ValueError("ell must be nonnegative")
        for eq in self.equations:
            for slot, _ in eq.plain + eq.reflected:
                if slot >= self.ell:
                    raise ValueError(f"slot {slot} out of range for ell={self.ell}")


@dataclass(frozen=True)
class OrbitPoint:
    """The sample pairs whose values determine all equations at x and 1-x."""

    x: Fraction
    pairs: frozenset[tuple[Fraction, int]]


def orbit(x: object, ell: int) -> OrbitPoint:
    """The orbit of x: both arguments x and 1-x across all slots."""
    xq = rational(x)
    if xq < 0 or xq > 1:
        raise ValueError("orbit points live in [0, 1]")
    pairs = frozenset(
        [(xq, i) for i in range(ell)] + [(1 - xq, i) for i in range(ell)]
    )
    return OrbitPoint(x=xq, pairs=pairs)


FunctionLike = Union[
    Callable[[Fraction, int], Fraction], Mapping[tuple[Fraction, int], Fraction]
]


def _lookup(f: FunctionLike, x: Fraction, slot: int) -> Fraction:
    if callable(f):
        return f(x, slot)
    return f[(x, slot)]


def delta_k(spec: SystemSpec, f: FunctionLike, k: int, x: object) -> Fraction:
    """Evaluate equation k of the system on f at the point x."""
    if not 0 <= k < len(spec.equations):
        raise IndexError(f"no equation {k}")
    xq = rational(x)
    eq = spec.equations[k]
    total = Fraction(0)
    for slot, coeff in eq.plain:
        total += coeff * _lookup(f, xq, slot)
    for slot, coeff in eq.reflected:
        total += coeff * _lookup(f, 1 - xq, slot)
    return total


@dataclass
class FiniteSolution:
    """Values of the unknowns at the two interior sample points."""

    m: int
    ell: int
    values: dict[tuple[Fraction, int], Fraction]

    def at(self, x: Fraction, slot: int) -> Fraction:
        return self.values[(x, slot)]


def solve_finite(spec: SystemSpec, m: int = 3) -> list[FiniteSolution]:
    """A basis of solutions of the system sampled at {1/m, (m-1)/m}.

    Unknowns are the values f(1/m, s) and f((m-1)/m, s); each equation is
    instantiated at both sample points (reflection swaps them).  Endpoint
    values are implicitly zero and do not appear.
    """
    if not isinstance(m, int) or m <= 2:
        raise ValueError("the sample level m must be an integer > 2")
    lo = Fraction(1, m)
    hi = Fraction(m - 1, m)
    ncols = 2 * spec.ell

    def col(x: Fraction, slot: int) -> int:
        return 2 * slot + (0 if x == lo else 1)

    raw_rows: list[dict[int, Fraction]] = []
    for eq in spec.equations:
        for x in (lo, hi):
            row: dict[int, Fraction] = {}
            for slot, coeff in eq.plain:
                c = col(x, slot)
                row[c] = row.get(c, Fraction(0)) + coeff
            for slot, coeff in eq.reflected:
                c = col(1 - x, slot)
                row[c] = row.get(c, Fraction(0)) + coeff
            row = {c: v for c, v in row.items() if v != 0}
            if row:
                raw_rows.append(row)
    int_rows: list[dict[int, int]] = []
    for row in raw_rows:
        den = 1
        for v in row.values():
            den = lcm(den, v.denominator)
        int_rows.append({c: int(v * den) for c, v in row.items()})
    basis = kernel_of_rows(int_rows, ncols)
    out = []
    for vec in basis:
        values = {}
        for s in range(spec.ell):
            values[(lo, s)] = vec[2 * s]
            values[(hi, s)] = vec[2 * s + 1]
        out.append(FiniteSolution(m=m, ell=spec.ell, values=values))
    return out


@dataclass(frozen=True)
class EdgeProfile:
    """A piecewise linear function on [0,1], zero at the endpoints, with
    breakpoints at 1/m and (m-1)/m."""

    m: int
    v: Fraction  # value at 1/m
    w: Fraction  # value at (m-1)/m

    def at(self, x: object) -> Fraction:
        xq = rational(x)
        if xq < 0 or xq > 1:
            raise ValueError("profiles are defined on [0, 1]")
        m = self.m
        lo = Fraction(1, m)
        hi = Fraction(m - 1, m)
        if xq <= lo:
            return xq * m * self.v
        if xq >= hi:
            return (1 - xq) * m * self.w
        t = (xq - lo) / (hi - lo)
        return (1 - t) * self.v + t * self.w


def lift_pwl(sol: FiniteSolution) -> list[EdgeProfile]:
    """Interpolate a finite solution to piecewise linear interval functions."""
    lo = Fraction(1, sol.m)
    hi = Fraction(sol.m - 1, sol.m)
    return [
        EdgeProfile(m=sol.m, v=sol.values[(lo, s)], w=sol.values[(hi, s)])
        for s in range(sol.ell)
    ]


def _edge_parameter_form(
    face: Face, v_start: tuple[int, int], v_end: tuple[int, int]
) -> tuple[Face, bool]:
    """Canonical slot face and whether the sweep runs tip-to-base (reflected)."""
    canon, _ = canonical_mod_lattice(face)
    base, tip = face.vertices_units()
    if v_start == base and v_end == tip:
        return canon, False
    if v_start == tip and v_end == base:
        return canon, True
    raise ValueError(
        f"sweep endpoints {v_start}, {v_end} do not span the edge {face}"
    )


def tuples_to_system(
    tuples: Sequence[SevenTuple],
    zero_edges: Sequence[Face] = (),
    required_slots: Sequence[Face] = (),
) -> tuple[SystemSpec, dict[Face, int]]:
    """Translate edge-supported tuples into a functional-equation system.

    Each tuple must be class 2 or 3 (faces are edges and points only, at
    least one edge).  One slot is created per distinct edge modulo Z^2; the
    sweep of F(tau) maps each edge position to the argument lambda or
    1 - lambda depending on its orientation against the edge's base vertex.
    Point terms vanish (perturbations are zero on vertices) and terms on
    ``zero_edges`` drop; ``required_slots`` forces slots for edges that no
    equation mentions so free directions are preserved.
    """
    zero_set = {canonical_mod_lattice(f)[0] for f in zero_edges}
    slot_faces: set[Face] = set()
    for f in required_slots:
        canon = canonical_mod_lattice(f)[0]
        if canon.kind not in (FaceKind.EDGE_V, FaceKind.EDGE_H, FaceKind.EDGE_D):
            raise ValueError(f"required slot {f} is not an edge")
        if canon not in zero_set:
            slot_faces.add(canon)
    prepared = []
    for tau in tuples:
        cls = classify_kinds(tau)
        if cls not in (2, 3):
            raise ValueError(
                f"only point-edge tuples with one-dimensional sweeps translate "
                f"to equations; got class {cls}: {tau}"
            )
        triples = vertex_triples(tau)
        if len(triples) != 2:
            raise ValueError(f"expected a one-dimensional F, got {tau}")
        v0, v1 = sorted(triples)
        terms = []  # (slot face, reflected, coeff)
        for pos in range(3):
            face = tau.faces[pos]
            if face.kind is FaceKind.POINT:
                continue
            canon, reflected = _edge_parameter_form(face, v0[pos], v1[pos])
            slot_faces.add(canon)
            if canon in zero_set:
                continue
            terms.append((canon, reflected, Fraction(tau.sigma[pos])))
        prepared.append(terms)
    slot_faces -= zero_set
    slots = {face: i for i, face in enumerate(sorted(slot_faces))}
    equations: set[SystemEquation] = set()
    for terms in prepared:
        plain: dict[int, Fraction] = {}
        refl: dict[int, Fraction] = {}
        for face, reflected, coeff in terms:
            target = refl if reflected else plain
            s = slots[face]
            target[s] = target.get(s, Fraction(0)) + coeff
        plain = {s: c for s, c in plain.items() if c != 0}
        refl = {s: c for s, c in refl.items() if c != 0}
        if not plain and not refl:
            continue
        equations.add(
            SystemEquation(
                plain=tuple(sorted(plain.items())),
                reflected=tuple(sorted(refl.items())),
            )
        )
    spec = SystemSpec(
        ell=len(slots),
        equations=tuple(
            sorted(equations, key=lambda e: (e.plain, e.reflected))
        ),
    )
    return spec, slots
