"""Seven-tuples: triples of faces tied by a signed linear relation.

A seven-tuple ``tau = (I1, I2, I3, sigma, t)`` consists of three faces of one
triangulation, three signs and a translation ``t`` in ``(1/q)Z^2``.  It
describes the polytope

    F(tau) = { (x1, x2, x3) in I1 x I2 x I3 : sigma1 x1 + sigma2 x2 + sigma3 x3 = t }

which encodes one family of additivity relations of a function: the relation
``sigma1 pi(x1) + sigma2 pi(x2) + sigma3 pi(x3) = const`` holding identically
on ``F``.  The tuple is *valid* when every face is fully used, that is when
the projection of ``F`` to each coordinate equals the face itself.

Everything here works in integer units of ``1/q``; the vertices of ``F`` are
exactly the triples of face vertices satisfying the linear relation, which
makes validity, additivity and parametrization finite checks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import lcm
from typing import Iterable, Iterator, Optional, Sequence

from .lattice import (
    EDGE_KINDS,
    Face,
    FaceKind,
    GeometryError,
    LatticePoint,
    TRIANGLE_KINDS,
    canonical_mod_lattice,
    decompose_polygon_to_faces,
    enumerate_fundamental_faces,
    identify_polygon_face,
    polygon_intersection,
    polygon_negate,
    polygon_sum,
    polygon_translate,
    triangle_edge_of_kind,
)
from .pwl import PwlFunction

Sign = int
_PERMS = tuple(permutations((0, 1, 2)))


@dataclass(frozen=True)
class SevenTuple:
    """Three faces, three signs, and the translation t (in units of 1/q)."""

    faces: tuple[Face, Face, Face]
    sigma: tuple[Sign, Sign, Sign]
    t_units: tuple[int, int]

    def __post_init__(self) -> None:
        if len(self.faces) != 3:
            raise ValueError("a seven-tuple has exactly three faces")
        q = self.faces[0].q
        if any(f.q != q for f in self.faces):
            raise ValueError("all faces must live on the same triangulation")
        if len(self.sigma) != 3 or any(s not in (-1, 1) for s in self.sigma):
            raise ValueError(f"sigma must be three signs, got {self.sigma!r}")
        tx, ty = self.t_units
        if not isinstance(tx, int) or not isinstance(ty, int):
            raise TypeError("t must be given in integer units of 1/q")

    @property
    def q(self) -> int:
        return self.faces[0].q

    @property
    def t(self) -> LatticePoint:
        return LatticePoint.from_units(self.t_units[0], self.t_units[1], self.q)

    def kinds(self) -> tuple[FaceKind, FaceKind, FaceKind]:
        return tuple(f.kind for f in self.faces)  # type: ignore[return-value]

    def permuted(self, perm: Sequence[int]) -> "SevenTuple":
        return SevenTuple(
            faces=tuple(self.faces[p] for p in perm),  # type: ignore[arg-type]
            sigma=tuple(self.sigma[p] for p in perm),  # type: ignore[arg-type]
            t_units=self.t_units,
        )

    def negated(self) -> "SevenTuple":
        """The equivalent tuple with all signs and t negated."""
        return SevenTuple(
            faces=self.faces,
            sigma=tuple(-s for s in self.sigma),  # type: ignore[arg-type]
            t_units=(-self.t_units[0], -self.t_units[1]),
        )

    def with_face_translated(self, i: int, zx: int, zy: int) -> "SevenTuple":
        """Translate face i by the integer vector (zx, zy), adjusting t."""
        q = self.q
        faces = list(self.faces)
        faces[i] = faces[i].translated(zx, zy)
        s = self.sigma[i]
        t = (self.t_units[0] + s * zx * q, self.t_units[1] + s * zy * q)
        return SevenTuple(tuple(faces), self.sigma, t)  # type: ignore[arg-type]

    def canonical_key(self):
        """A key identifying tuples up to permutation, sign flip and Z^2 shifts."""
        q = self.q
        best = None
        for perm in _PERMS:
            tau = self.permuted(perm)
            if tau.sigma[0] < 0:
                tau = tau.negated()
            tx, ty = tau.t_units
            face_keys = []
            for face, s in zip(tau.faces, tau.sigma):
                canon, (zx, zy) = canonical_mod_lattice(face)
                face_keys.append((canon.kind, canon.ax, canon.ay))
                tx += s * zx * q
                ty += s * zy * q
            key = (tuple(face_keys), tau.sigma, (tx, ty))
            if best is None or key < best:
                best = key
        return best

    def __repr__(self) -> str:
        fs = ", ".join(repr(f) for f in self.faces)
        return f"SevenTuple([{fs}], sigma={self.sigma}, t={self.t_units})"


def _signed_polygon(face: Face, sign: Sign) -> tuple[tuple[int, int], ...]:
    poly = face.polygon()
    return poly if sign == 1 else polygon_negate(poly)


def project(tau: SevenTuple, i: int) -> Optional[Face]:
    """The projection of F(tau) to coordinate i (1-based), as a face or None.

    The projection equals ``I_i`` intersected with the window
    ``sigma_i t - (sigma_i sigma_j I_j + sigma_i sigma_k I_k)``; it is always
    a face of the triangulation or empty.
    """
    if i not in (1, 2, 3):
        raise ValueError("coordinate index must be 1, 2 or 3")
    idx = i - 1
    j, k = [a for a in range(3) if a != idx]
    si = tau.sigma[idx]
    mj = _signed_polygon(tau.faces[j], si * tau.sigma[j])
    mk = _signed_polygon(tau.faces[k], si * tau.sigma[k])
    window = polygon_translate(
        polygon_negate(polygon_sum(mj, mk)),
        (si * tau.t_units[0], si * tau.t_units[1]),
    )
    inter = polygon_intersection(tau.faces[idx].polygon(), window)
    if not inter:
        return None
    face = identify_polygon_face(inter, tau.q)
    if face is None:
        raise GeometryError(
            f"projection of {tau} to coordinate {i} is not a face: {inter}"
        )
    return face


def is_valid(tau: SevenTuple) -> bool:
    """True when every projection of F(tau) fills its face."""
    for i in (1, 2, 3):
        if project(tau, i) != tau.faces[i - 1]:
            return False
    return True


_CATEGORY = {
    FaceKind.POINT: "point",
    FaceKind.EDGE_V: "edge_v",
    FaceKind.EDGE_H: "edge_h",
    FaceKind.EDGE_D: "edge_d",
    FaceKind.TRI_LOWER: "tri",
    FaceKind.TRI_UPPER: "tri",
}

_EDGE_CATEGORIES = ("edge_v", "edge_h", "edge_d")


def _pattern_class(pattern: tuple[str, str, str]) -> Optional[int]:
    """The class of an ordered kind pattern, or None if not admissible."""
    counts = {cat: pattern.count(cat) for cat in set(pattern)}
    points = counts.get("point", 0)
    tris = counts.get("tri", 0)
    edges = 3 - points - tris
    if points == 3:
        return 1
    if points == 1 and edges == 2:
        cats = [c for c in pattern if c != "point"]
        return 2 if cats[0] == cats[1] else None
    if edges == 3:
        distinct = len({c for c in pattern})
        if distinct == 3:
            return 3
        if distinct == 1:
            return 7
        return None
    if points == 1 and tris == 2:
        return 4
    if edges == 1 and tris == 2:
        return 5
    if edges == 2 and tris == 1:
        cats = [c for c in pattern if c != "tri"]
        return 6 if cats[0] != cats[1] else None
    if tris == 3:
        return 7
    return None


def admissible_kind_patterns() -> dict[tuple[str, str, str], int]:
    """The ordered kind patterns a valid tuple can have, mapped to class.

    Kinds are collapsed to the categories point, edge_v, edge_h, edge_d, tri
    (both triangle orientations behave alike).  Exactly 50 of the 125 ordered
    patterns are admissible.
    """
    cats = ("point", "edge_v", "edge_h", "edge_d", "tri")
    out: dict[tuple[str, str, str], int] = {}
    for a in cats:
        for b in cats:
            for c in cats:
                cls = _pattern_class((a, b, c))
                if cls is not None:
                    out[(a, b, c)] = cls
    return out


def classify(tau: SevenTuple) -> int:
    """The class (1..7) of a valid tuple; rejects non-valid tuples."""
    if not is_valid(tau):
        raise ValueError(f"tuple is not valid: {tau}")
    return classify_kinds(tau)


def classify_kinds(tau: SevenTuple) -> int:
    """Class by kind pattern alone (caller vouches for validity)."""
    pattern = tuple(_CATEGORY[k] for k in tau.kinds())
    cls = _pattern_class(pattern)  # type: ignore[arg-type]
    if cls is None:
        raise GeometryError(
            f"valid tuple with inadmissible kind pattern {pattern}: {tau}"
        )
    return cls


def vertex_triples(tau: SevenTuple) -> list[tuple[tuple[int, int], ...]]:
    """Vertices of F(tau): the face-vertex triples satisfying the relation.

    Every vertex of F is integral in units of 1/q and projects to a vertex of
    each face, so filtering the at most 27 combinations is exhaustive.
    """
    s1, s2, s3 = tau.sigma
    tx, ty = tau.t_units
    out = []
    v3set = tau.faces[2].vertices_units()
    for v1 in tau.faces[0].vertices_units():
        for v2 in tau.faces[1].vertices_units():
            rx = tx - s1 * v1[0] - s2 * v2[0]
            ry = ty - s1 * v1[1] - s2 * v2[1]
            v3 = (s3 * rx, s3 * ry)
            if v3 in v3set:
                out.append((v1, v2, v3))
    return out


def _matrix_rank(rows: list[list[int]]) -> int:
    """Rank of a small integer matrix by fraction-free elimination."""
    mat = [row[:] for row in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for col in range(cols):
        pivot = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        lead = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [lead * a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


@dataclass(frozen=True)
class Parametrization:
    """The polytope F(tau) by its vertices and affine dimension."""

    vertices: tuple[tuple[LatticePoint, LatticePoint, LatticePoint], ...]
    dim: int
    base: tuple[LatticePoint, LatticePoint, LatticePoint]
    directions: tuple[tuple[LatticePoint, LatticePoint, LatticePoint], ...]


# t is determined by the faces and sigma for these classes; for classes 5
# and 7 several translations give valid tuples of the same faces.
_UNIQUE_T_CLASSES = {1, 2, 3, 4, 6}


def unique_valid_t(
    faces: tuple[Face, Face, Face], sigma: tuple[Sign, Sign, Sign]
) -> Optional[tuple[int, int]]:
    """The unique t making (faces, sigma, t) valid, or None if none does.

    Raises if several t work (the caller should only ask for classes where
    t is determined).
    """
    candidates = set()
    s1, s2, s3 = sigma
    for v1 in faces[0].vertices_units():
        for v2 in faces[1].vertices_units():
            for v3 in faces[2].vertices_units():
                candidates.add(
                    (
                        s1 * v1[0] + s2 * v2[0] + s3 * v3[0],
                        s1 * v1[1] + s2 * v2[1] + s3 * v3[1],
                    )
                )
    hits = [
        t for t in sorted(candidates) if is_valid(SevenTuple(faces, sigma, t))
    ]
    if not hits:
        return None
    if len(hits) > 1:
        raise GeometryError(
            f"translation not unique for faces {faces} and sigma {sigma}"
        )
    return hits[0]


def parametrize_F(tau: SevenTuple) -> Parametrization:
    """Vertices, dimension and an affine basis of F(tau) for a valid tuple."""
    if not is_valid(tau):
        raise ValueError(f"tuple is not valid: {tau}")
    cls = classify_kinds(tau)
    if cls in _UNIQUE_T_CLASSES:
        expected = unique_valid_t(tau.faces, tau.sigma)
        if expected != tau.t_units:
            raise GeometryError(
                f"inconsistent translation: recomputed {expected}, stored {tau.t_units}"
            )
    triples = vertex_triples(tau)
    if not triples:
        raise GeometryError(f"valid tuple with empty F: {tau}")
    base = triples[0]
    diff_rows = [
        [v[c][a] - base[c][a] for c in range(3) for a in range(2)]
        for v in triples[1:]
    ]
    dim = _matrix_rank(diff_rows) if diff_rows else 0
    q = tau.q

    def lift(triple: tuple[tuple[int, int], ...]):
        return tuple(LatticePoint.from_units(v[0], v[1], q) for v in triple)

    # A basis of directions: vertex differences that increase the rank.
    directions = []
    chosen: list[list[int]] = []
    for v, row in zip(triples[1:], diff_rows):
        if _matrix_rank(chosen + [row]) > len(chosen):
            chosen.append(row)
            directions.append(
                tuple(
                    LatticePoint.from_units(v[c][0] - base[c][0], v[c][1] - base[c][1], q)
                    for c in range(3)
                )
            )
        if len(chosen) == dim:
            break
    return Parametrization(
        vertices=tuple(lift(tr) for tr in triples),
        dim=dim,
        base=lift(base),
        directions=tuple(directions),
    )


def is_additive(pi: PwlFunction, tau: SevenTuple) -> bool:
    """Whether the relation of tau holds identically for pi on F(tau).

    The signed sum is affine on F, so vanishing at the vertices of F is
    equivalent to vanishing on all of F.
    """
    if pi.q != tau.q:
        raise ValueError("function and tuple use different triangulations")
    triples = vertex_triples(tau)
    if not triples:
        raise ValueError(f"F is empty for {tau}")
    s1, s2, s3 = tau.sigma
    for v1, v2, v3 in triples:
        d = (
            s1 * pi.value_at_units(*v1)
            + s2 * pi.value_at_units(*v2)
            + s3 * pi.value_at_units(*v3)
        )
        if d != 0:
            return False
    return True


@dataclass(frozen=True)
class AdditiveFaceSet:
    """All additivity tuples of a function, in the normal form
    sigma = (1, 1, -1), t = 0, with the first two faces fundamental."""

    q: int
    tuples: tuple[SevenTuple, ...]

    def __iter__(self) -> Iterator[SevenTuple]:
        return iter(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def census(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for tau in self.tuples:
            cls = classify_kinds(tau)
            counts[cls] = counts.get(cls, 0) + 1
        return counts

    def third_face_shift(self, tau: SevenTuple) -> tuple[int, int]:
        """The Z^2 shift that brings the stored third face into [0,1)^2."""
        return canonical_mod_lattice(tau.faces[2])[1]


def _tight_vertex_table(pi: PwlFunction) -> set[tuple[tuple[int, int], tuple[int, int]]]:
    q = pi.q
    tight = set()
    for ax in range(q):
        for ay in range(q):
            for bx in range(q):
                for by in range(q):
                    if pi.value_at_units(ax, ay) + pi.value_at_units(bx, by) == pi.value_at_units(ax + bx, ay + by):
                        tight.add(((ax, ay), (bx, by)))
    return tight


def _enumerate_for_pairs(
    pi: PwlFunction,
    pairs: Sequence[tuple[Face, Face]],
    tight: set[tuple[tuple[int, int], tuple[int, int]]],
) -> dict[object, SevenTuple]:
    q = pi.q
    found: dict[object, SevenTuple] = {}
    for fa, fb in pairs:
        va_list = fa.vertices_units()
        vb_list = fb.vertices_units()
        if not any(
            ((ax % q, ay % q), (bx % q, by % q)) in tight
            for ax, ay in va_list
            for bx, by in vb_list
        ):
            continue
        sum_poly = polygon_sum(fa.polygon(), fb.polygon())
        for i3 in decompose_polygon_to_faces(sum_poly, q):
            v3set = set(i3.vertices_units())
            triples = [
                (va, vb)
                for va in va_list
                for vb in vb_list
                if (va[0] + vb[0], va[1] + vb[1]) in v3set
            ]
            if not triples:
                continue
            additive = all(
                pi.value_at_units(*va) + pi.value_at_units(*vb)
                == pi.value_at_units(va[0] + vb[0], va[1] + vb[1])
                for va, vb in triples
            )
            if not additive:
                continue
            tau = SevenTuple((fa, fb, i3), (1, 1, -1), (0, 0))
            if not is_valid(tau):
                continue
            key = tau.canonical_key()
            if key not in found:
                found[key] = tau
    return found


def enumerate_additive(pi: PwlFunction) -> AdditiveFaceSet:
    """All additivity tuples of pi, up to the tuple symmetries.

    Fixing sigma = (1, 1, -1) and t = 0 loses nothing: permutations, the
    global sign flip and per-face Z^2 shifts generate all other forms.  The
    third face ranges over the decomposition of I1 + I2, so its anchor may
    leave the fundamental domain; the shift is recoverable per tuple.
    """
    q = pi.q
    faces = sorted(enumerate_fundamental_faces(q))
    tight = _tight_vertex_table(pi)
    pairs = [
        (faces[a], faces[b])
        for a in range(len(faces))
        for b in range(a, len(faces))
    ]
    threads = int(os.environ.get("GROUPCUT_THREADS", "1") or "1")
    if threads > 1:
        chunk = (len(pairs) + threads - 1) // threads
        chunks = [pairs[i : i + chunk] for i in range(0, len(pairs), chunk)]
        found: dict[object, SevenTuple] = {}
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(
                lambda c: _enumerate_for_pairs(pi, c, tight), chunks
            ):
                for key, tau in part.items():
                    found.setdefault(key, tau)
    else:
        found = _enumerate_for_pairs(pi, pairs, tight)
    ordered = tuple(tau for _, tau in sorted(found.items()))
    return AdditiveFaceSet(q=q, tuples=ordered)


def separate_edge(tau: SevenTuple) -> SevenTuple:
    """Split a class-6 tuple: pin the second edge at a vertex.

    For a valid tuple holding two edges of different directions and one
    triangle, there is a vertex u of the second edge and an edge K1 of the
    triangle, parallel to the first edge, such that replacing the second edge
    by {u} and the triangle by K1 gives a valid class-2 tuple.
    """
    cls = classify(tau)
    if cls != 6:
        raise ValueError(f"separate_edge needs a class-6 tuple, got class {cls}")
    positions = list(range(3))
    tri_pos = next(p for p in positions if tau.faces[p].kind in TRIANGLE_KINDS)
    edge_pos = [p for p in positions if p != tri_pos]
    first, second = edge_pos
    tri = tau.faces[tri_pos]
    k1 = triangle_edge_of_kind(tri, tau.faces[first].kind)
    for u in sorted(tau.faces[second].vertices_units()):
        faces = list(tau.faces)
        faces[second] = Face(FaceKind.POINT, u[0], u[1], tau.q)
        faces[tri_pos] = k1
        candidate = SevenTuple(tuple(faces), tau.sigma, tau.t_units)  # type: ignore[arg-type]
        if is_valid(candidate):
            return candidate
    raise GeometryError(f"no separating vertex found for {tau}")
