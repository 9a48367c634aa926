"""Exact geometry of the standard triangulation of the plane.

The triangulation ``P_q`` cuts the plane along the lines ``x = b``, ``y = b``
and ``x + y = b`` for ``b`` in ``(1/q)Z``.  Its faces are lattice points,
three families of unit edges (vertical, horizontal, diagonal) and two families
of triangles (the lower-left and upper-right halves of each grid cell).  Every
face is a kind plus an integer anchor measured in units of ``1/q``, so all of
the polygon arithmetic in this module is integer arithmetic and therefore
exact.  The empty set is represented by ``None`` wherever a face-or-nothing
result is possible; it is never a ``Face`` value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

Rational = Fraction

_FRACTION_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


class GeometryError(ValueError):
    """Raised when exact geometry reaches a state it proves impossible."""


def rational(value: object) -> Fraction:
    """Coerce an exact input (int, Fraction, or a 'p/q' string) to Fraction.

    Floats and decimal strings are rejected: no inexact value may enter the
    arithmetic.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rational numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _FRACTION_RE.match(text):
            raise ValueError(f"not an integer or fraction string: {value!r}")
        return Fraction(text)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class LatticePoint(NamedTuple):
    """A point of the plane with exact rational coordinates."""

    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x: object, y: object) -> "LatticePoint":
        return cls(rational(x), rational(y))

    @classmethod
    def from_units(cls, ux: int, uy: int, q: int) -> "LatticePoint":
        return cls(Fraction(ux, q), Fraction(uy, q))

    def __add__(self, other: "LatticePoint") -> "LatticePoint":  # type: ignore[override]
        return LatticePoint(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.x, -self.y)

    def scaled(self, c: Fraction) -> "LatticePoint":
        return LatticePoint(self.x * c, self.y * c)

    def units(self, q: int) -> tuple[int, int]:
        """Coordinates in units of 1/q; raises if the point is off-grid."""
        ux = self.x * q
        uy = self.y * q
        if ux.denominator != 1 or uy.denominator != 1:
            raise GeometryError(f"{self} is not on the (1/{q})Z^2 grid")
        return int(ux), int(uy)


class FaceKind(IntEnum):
    POINT = 0
    EDGE_V = 1
    EDGE_H = 2
    EDGE_D = 3
    TRI_LOWER = 4
    TRI_UPPER = 5

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]


_KIND_LABELS = {
    FaceKind.POINT: "point",
    FaceKind.EDGE_V: "edge_v",
    FaceKind.EDGE_H: "edge_h",
    FaceKind.EDGE_D: "edge_d",
    FaceKind.TRI_LOWER: "tri_lower",
    FaceKind.TRI_UPPER: "tri_upper",
}

EDGE_KINDS = (FaceKind.EDGE_V, FaceKind.EDGE_H, FaceKind.EDGE_D)
TRIANGLE_KINDS = (FaceKind.TRI_LOWER, FaceKind.TRI_UPPER)

# Vertex offsets from the anchor, in units of 1/q.  The order is fixed and is
# part of the contract: edge vertices are listed (base, tip) and parameter 0
# of an edge always sits at the base.
_VERTEX_OFFSETS: dict[FaceKind, tuple[tuple[int, int], ...]] = {
    FaceKind.POINT: ((0, 0),),
    FaceKind.EDGE_V: ((0, 0), (0, 1)),
    FaceKind.EDGE_H: ((0, 0), (1, 0)),
    FaceKind.EDGE_D: ((1, 0), (0, 1)),
    FaceKind.TRI_LOWER: ((0, 0), (1, 0), (0, 1)),
    FaceKind.TRI_UPPER: ((1, 0), (0, 1), (1, 1)),
}

_DIMENSION = {
    FaceKind.POINT: 0,
    FaceKind.EDGE_V: 1,
    FaceKind.EDGE_H: 1,
    FaceKind.EDGE_D: 1,
    FaceKind.TRI_LOWER: 2,
    FaceKind.TRI_UPPER: 2,
}


@dataclass(frozen=True, order=True)
class Face:
    """A closed face of P_q: a kind plus an anchor in units of 1/q."""

    kind: FaceKind
    ax: int
    ay: int
    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q!r}")
        if not isinstance(self.ax, int) or not isinstance(self.ay, int):
            raise TypeError("face anchors must be integers (units of 1/q)")
        if not isinstance(self.kind, FaceKind):
            object.__setattr__(self, "kind", FaceKind(self.kind))

    def __repr__(self) -> str:
        return f"Face({self.kind.label}, ({self.ax}, {self.ay}), q={self.q})"

    @property
    def dim(self) -> int:
        return _DIMENSION[self.kind]

    def vertices_units(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (self.ax + dx, self.ay + dy) for dx, dy in _VERTEX_OFFSETS[self.kind]
        )

    def vertices(self) -> tuple[LatticePoint, ...]:
        return tuple(
            LatticePoint.from_units(ux, uy, self.q) for ux, uy in self.vertices_units()
        )

    def polygon(self) -> tuple[tuple[int, int], ...]:
        """Vertices in convex position (unit coordinates)."""
        return convex_hull_units(self.vertices_units())

    def subfaces(self) -> tuple["Face", ...]:
        """The proper faces of this face (edges and vertices, closed)."""
        out: list[Face] = []
        if self.kind in TRIANGLE_KINDS:
            out.extend(triangle_edges(self))
        if self.dim > 0:
            out.extend(
                Face(FaceKind.POINT, ux, uy, self.q) for ux, uy in self.vertices_units()
            )
        return tuple(out)

    def closure(self) -> tuple["Face", ...]:
        return (self,) + self.subfaces()

    def translated_units(self, ux: int, uy: int) -> "Face":
        """Translate by (ux/q, uy/q)."""
        return Face(self.kind, self.ax + ux, self.ay + uy, self.q)

    def translated(self, zx: int, zy: int) -> "Face":
        """Translate by the integer vector (zx, zy)."""
        return self.translated_units(zx * self.q, zy * self.q)

    def contains_units(self, p: tuple[int, int]) -> bool:
        return _polygon_contains(self.polygon(), p)


def triangle_edges(face: Face) -> tuple[Face, Face, Face]:
    """The three edges of a triangle, ordered (vertical, horizontal, diagonal)."""
    a, b, q = face.ax, face.ay, face.q
    if face.kind is FaceKind.TRI_LOWER:
        return (
            Face(FaceKind.EDGE_V, a, b, q),
            Face(FaceKind.EDGE_H, a, b, q),
            Face(FaceKind.EDGE_D, a, b, q),
        )
    if face.kind is FaceKind.TRI_UPPER:
        return (
            Face(FaceKind.EDGE_V, a + 1, b, q),
            Face(FaceKind.EDGE_H, a, b + 1, q),
            Face(FaceKind.EDGE_D, a, b, q),
        )
    raise ValueError(f"{face} is not a triangle")


def triangle_edge_of_kind(face: Face, kind: FaceKind) -> Face:
    for edge in triangle_edges(face):
        if edge.kind is kind:
            return edge
    raise ValueError(f"{face} has no edge of kind {kind}")


@dataclass(frozen=True)
class FaceSet:
    """A finite union of faces of one triangulation, one entry per face."""

    q: int
    members: frozenset[Face]
    subface_closed: bool = False

    def __post_init__(self) -> None:
        for face in self.members:
            if face.q != self.q:
                raise ValueError("all members must share the same q")
        if self.subface_closed:
            for face in self.members:
                for sub in face.subfaces():
                    if sub not in self.members:
                        raise ValueError(
                            f"face set flagged closed but {sub} (a face of {face}) is missing"
                        )

    def __contains__(self, face: Face) -> bool:
        return face in self.members

    def __iter__(self) -> Iterator[Face]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def maximal(self) -> tuple[Face, ...]:
        """Members that are not proper faces of another member."""
        proper: set[Face] = set()
        for face in self.members:
            proper.update(face.subfaces())
        return tuple(sorted(f for f in self.members if f not in proper))

    @classmethod
    def closed(cls, q: int, faces: Iterable[Face]) -> "FaceSet":
        members: set[Face] = set()
        for face in faces:
            members.update(face.closure())
        return cls(q, frozenset(members), subface_closed=True)


def enumerate_fundamental_faces(q: int) -> FaceSet:
    """All 6*q^2 faces whose anchor lies in the fundamental domain [0,1)^2."""
    if not isinstance(q, int) or q < 1:
        raise ValueError(f"q must be a positive integer, got {q!r}")
    members = {
        Face(kind, ax, ay, q)
        for kind in FaceKind
        for ax in range(q)
        for ay in range(q)
    }
    return FaceSet(q, frozenset(members))


def face_vertices(face: Face) -> list[LatticePoint]:
    """The vertices of a face as exact points."""
    return list(face.vertices())


_NEGATION: dict[FaceKind, tuple[FaceKind, int, int]] = {
    # kind -> (negated kind, anchor offset applied to the negated anchor)
    FaceKind.POINT: (FaceKind.POINT, 0, 0),
    FaceKind.EDGE_H: (FaceKind.EDGE_H, -1, 0),
    FaceKind.EDGE_V: (FaceKind.EDGE_V, 0, -1),
    FaceKind.EDGE_D: (FaceKind.EDGE_D, -1, -1),
    FaceKind.TRI_LOWER: (FaceKind.TRI_UPPER, -1, -1),
    FaceKind.TRI_UPPER: (FaceKind.TRI_LOWER, -1, -1),
}


def negate_single_face(face: Face) -> Face:
    """The face -I (pointwise negation); always again a face of P_q."""
    kind, dx, dy = _NEGATION[face.kind]
    return Face(kind, -face.ax + dx, -face.ay + dy, face.q)


def negate_face(face: Face) -> FaceSet:
    """The set -I expressed as a subface-closed union of faces."""
    return FaceSet.closed(face.q, [negate_single_face(face)])


def minkowski_sum(f: Face, g: Face) -> FaceSet:
    """The Minkowski sum I + J as a subface-closed union of faces of P_q.

    The sum of two faces of the triangulation is always a union of faces,
    which this function verifies by an exact area / length count.
    """
    if f.q != g.q:
        raise ValueError("faces live on different triangulations")
    poly = polygon_sum(f.polygon(), g.polygon())
    faces = decompose_polygon_to_faces(poly, f.q)
    return FaceSet(f.q, frozenset(faces), subface_closed=True)


def face_containing(p: LatticePoint, q: int) -> Face:
    """The unique smallest face of P_q containing the point p."""
    x = p.x * q
    y = p.y * q
    ax = x.numerator // x.denominator
    ay = y.numerator // y.denominator
    fx = x - ax
    fy = y - ay
    if fx == 0 and fy == 0:
        return Face(FaceKind.POINT, ax, ay, q)
    if fy == 0:
        return Face(FaceKind.EDGE_H, ax, ay, q)
    if fx == 0:
        return Face(FaceKind.EDGE_V, ax, ay, q)
    s = fx + fy
    if s == 1:
        return Face(FaceKind.EDGE_D, ax, ay, q)
    if s < 1:
        return Face(FaceKind.TRI_LOWER, ax, ay, q)
    return Face(FaceKind.TRI_UPPER, ax, ay, q)


def canonical_mod_lattice(face: Face) -> tuple[Face, tuple[int, int]]:
    """Reduce the anchor into [0, q)^2; returns (canonical face, shift).

    The shift z is the integer vector with canonical = face translated by z.
    """
    q = face.q
    cx = face.ax % q
    cy = face.ay % q
    zx = (cx - face.ax) // q
    zy = (cy - face.ay) // q
    return Face(face.kind, cx, cy, q), (zx, zy)


def canonical_face(face: Face) -> Face:
    return canonical_mod_lattice(face)[0]


# The fixed inequality description A x <= b shared by all faces: six rows,
# normals below, offsets depending on the face.  Offsets are reported in
# units of 1/q (always integers).
A_MATRIX_ROWS: tuple[tuple[int, int], ...] = (
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, -1),
)


def inequality_offsets(face: Face) -> tuple[int, ...]:
    """Offsets b (units of 1/q) such that face = {x : A x <= b/q}."""
    verts = face.vertices_units()
    return tuple(
        max(ax * vx + ay * vy for vx, vy in verts) for ax, ay in A_MATRIX_ROWS
    )


# ---------------------------------------------------------------------------
# Integer polygon toolkit.  Points are (x, y) int pairs in units of 1/q.
# Polygons are tuples of points in convex position, counterclockwise, without
# collinear interior points.  A 1-gon is a point, a 2-gon a segment.
# ---------------------------------------------------------------------------


def _cross(o: tuple[int, int], a: tuple[int, int], b: tuple[int, int]) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_units(points: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    pts = sorted(set(points))
    if not pts:
        return ()
    if len(pts) == 1:
        return (pts[0],)
    lower: list[tuple[int, int]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # All points collinear: keep the two extremes.
        return (pts[0], pts[-1])
    return tuple(hull)


def _between(a: tuple[int, int], b: tuple[int, int], p: tuple[int, int]) -> bool:
    if _cross(a, b, p) != 0:
        return False
    dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    if dot < 0:
        return False
    return dot <= (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2


def _polygon_contains(poly: Sequence[tuple[int, int]], p: tuple[int, int]) -> bool:
    if not poly:
        return False
    if len(poly) == 1:
        return poly[0] == p
    if len(poly) == 2:
        return _between(poly[0], poly[1], p)
    n = len(poly)
    for i in range(n):
        if _cross(poly[i], poly[(i + 1) % n], p) < 0:
            return False
    return True


def polygon_sum(
    a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]
) -> tuple[tuple[int, int], ...]:
    return convex_hull_units(
        (pa[0] + pb[0], pa[1] + pb[1]) for pa in a for pb in b
    )


def polygon_negate(a: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    return convex_hull_units((-p[0], -p[1]) for p in a)


def polygon_translate(
    a: Sequence[tuple[int, int]], t: tuple[int, int]
) -> tuple[tuple[int, int], ...]:
    return convex_hull_units((p[0] + t[0], p[1] + t[1]) for p in a)


def _segment_line_point(
    p: tuple[int, int], r: tuple[int, int], a: int, b: int, c: int
) -> tuple[int, int]:
    """Intersection of segment p-r with the line a x + b y = c.

    All lines that occur here are triangulation lines, whose pairwise
    intersections are lattice points, so the result must be integral.
    """
    fp = a * p[0] + b * p[1]
    fr = a * r[0] + b * r[1]
    den = fr - fp
    if den == 0:
        raise GeometryError("segment is parallel to the cutting line")
    num = c - fp
    xn = p[0] * den + num * (r[0] - p[0])
    yn = p[1] * den + num * (r[1] - p[1])
    if xn % den != 0 or yn % den != 0:
        raise GeometryError("non-integral intersection in lattice clipping")
    return (xn // den, yn // den)


def clip_halfplane(
    poly: Sequence[tuple[int, int]], a: int, b: int, c: int
) -> tuple[tuple[int, int], ...]:
    """Clip a convex polygon to the halfplane a x + b y <= c."""
    if not poly:
        return ()
    inside = [a * p[0] + b * p[1] <= c for p in poly]
    if all(inside):
        return tuple(poly)
    if not any(inside):
        return ()
    if len(poly) == 1:
        return ()
    if len(poly) == 2:
        p, r = poly
        cut = _segment_line_point(p, r, a, b, c)
        kept = p if inside[0] else r
        return convex_hull_units([kept, cut])
    out: list[tuple[int, int]] = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        cur_in, nxt_in = inside[i], inside[(i + 1) % n]
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            out.append(_segment_line_point(cur, nxt, a, b, c))
    return convex_hull_units(out)


def polygon_halfplanes(
    poly: Sequence[tuple[int, int]]
) -> list[tuple[int, int, int]]:
    """Halfplanes a x + b y <= c whose intersection is the polygon."""
    if not poly:
        raise GeometryError("empty polygon has no halfplane description")
    if len(poly) == 1:
        (x, y) = poly[0]
        return [(1, 0, x), (-1, 0, -x), (0, 1, y), (0, -1, -y)]
    if len(poly) == 2:
        p, r = poly
        dx, dy = r[0] - p[0], r[1] - p[1]
        line = (dy, -dx, dy * p[0] - dx * p[1])
        return [
            line,
            (-line[0], -line[1], -line[2]),
            (-dx, -dy, -(dx * p[0] + dy * p[1])),
            (dx, dy, dx * r[0] + dy * r[1]),
        ]
    out = []
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        dx, dy = r[0] - p[0], r[1] - p[1]
        # Interior is to the left of p -> r for a counterclockwise polygon.
        out.append((dy, -dx, dy * p[0] - dx * p[1]))
    return out


def polygon_intersection(
    a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]
) -> tuple[tuple[int, int], ...]:
    cur = tuple(a)
    for (ha, hb, hc) in polygon_halfplanes(b):
        cur = clip_halfplane(cur, ha, hb, hc)
        if not cur:
            return ()
    return cur


def polygon_area2(poly: Sequence[tuple[int, int]]) -> int:
    if len(poly) < 3:
        return 0
    s = 0
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        s += p[0] * r[1] - p[1] * r[0]
    return s


_EDGE_DIRECTIONS = {(0, 1): FaceKind.EDGE_V, (1, 0): FaceKind.EDGE_H, (1, -1): FaceKind.EDGE_D}


def identify_face(points: Iterable[tuple[int, int]], q: int) -> Optional[Face]:
    """Recognize a vertex set as a face of P_q; None if it is not one."""
    pts = sorted(set(points))
    if len(pts) == 1:
        return Face(FaceKind.POINT, pts[0][0], pts[0][1], q)
    if len(pts) == 2:
        (x0, y0), (x1, y1) = pts
        d = (x1 - x0, y1 - y0)
        kind = _EDGE_DIRECTIONS.get(d)
        if kind is None:
            return None
        if kind is FaceKind.EDGE_D:
            # Sorted diagonal endpoints are ((a, b+1), (a+1, b)).
            return Face(kind, x0, y0 - 1, q)
        return Face(kind, x0, y0, q)
    if len(pts) == 3:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        mx, my = min(xs), min(ys)
        cell = {(p[0] - mx, p[1] - my) for p in pts}
        if cell == {(0, 0), (1, 0), (0, 1)}:
            return Face(FaceKind.TRI_LOWER, mx, my, q)
        if cell == {(1, 0), (0, 1), (1, 1)}:
            return Face(FaceKind.TRI_UPPER, mx, my, q)
    return None


def identify_polygon_face(poly: Sequence[tuple[int, int]], q: int) -> Optional[Face]:
    """Recognize a polygon (hull form) as a single face of P_q."""
    return identify_face(poly, q)


def decompose_polygon_to_faces(
    poly: Sequence[tuple[int, int]], q: int
) -> list[Face]:
    """All faces of P_q contained in a convex lattice polygon.

    The polygon must be a union of faces (true for Minkowski sums of faces);
    an exact area or length count verifies this and raises otherwise.
    """
    if not poly:
        return []
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    out: list[Face] = []
    tri_count = 0
    for ax in range(x0, x1 + 1):
        for ay in range(y0, y1 + 1):
            for kind in FaceKind:
                face = Face(kind, ax, ay, q)
                if all(_polygon_contains(poly, v) for v in face.vertices_units()):
                    out.append(face)
                    if kind in TRIANGLE_KINDS:
                        tri_count += 1
    if len(poly) >= 3:
        if tri_count != polygon_area2(poly):
            raise GeometryError("polygon is not a union of triangulation faces")
    elif len(poly) == 2:
        p, r = poly
        steps = max(abs(r[0] - p[0]), abs(r[1] - p[1]))
        edge_count = sum(1 for f in out if f.kind in EDGE_KINDS)
        if edge_count != steps:
            raise GeometryError("segment is not a union of triangulation edges")
    return out
