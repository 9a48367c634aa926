"""Step 1-6 perturbation-space rewriting engine.

Decides extremality of a minimal piecewise linear function over P_q by
maintaining a triple (E, Z, P): the additivity tuples still carrying
constraints, the faces forced to zero, and the faces still in the domain.
Each step applies either an equal update (the space of admissible
perturbations is unchanged) or an equivalent update (a projection with a
recorded lift reconstructing the removed values), so any perturbation found
for the final state replays into one for the original function.

The full decision has two halves.  A perturbation of a minimal function
splits into the interpolant of its values on the (1/q)Z^2 lattice plus a
residual vanishing there; the coarse-grid kernel test covers the first half
and the step engine, whose zero set starts with all lattice vertices, covers
the second.  ``run_pipeline`` therefore runs the grid check before the
steps; disabling it restricts the verdict to lattice-vanishing
perturbations, which is only useful for exercising the step machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .groups import FiniteProblem, extremality_kernel, finite_minimality
from .lattice import (
    EDGE_KINDS,
    TRIANGLE_KINDS,
    Face,
    FaceKind,
    canonical_face,
    canonical_mod_lattice,
    enumerate_fundamental_faces,
    triangle_edge_of_kind,
    triangle_edges,
)
from .pwl import GridFunction, PwlFunction, interpolate, restrict
from .systems import lift_pwl, solve_finite, tuples_to_system
from .tuples import (
    SevenTuple,
    classify_kinds,
    enumerate_additive,
    is_valid,
    unique_valid_t,
)

__all__ = [
    "PipelineError",
    "LiftRecord",
    "PerturbationSpaceState",
    "PipelineResult",
    "init_state",
    "step1_drop_point_triples",
    "step2_fulldim_to_zeros",
    "step3_split_edge_tri_tri",
    "step4_project_tri_point_tri",
    "step5_canonicalize",
    "step5_dedupe_and_project",
    "step6_decide",
    "run_pipeline",
    "verify_certificate",
    "face_grid_points",
]


class PipelineError(RuntimeError):
    """An internal invariant of the rewriting engine failed."""


# ---------------------------------------------------------------------------
# Lift records.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftRecord:
    """Reconstruction rule for the interior of one triangle removed from P.

    * ``affine``: values come from a second triangle through the unimodular
      map x -> scale*x + shift (shift in 1/q units; scale is +-1 and also
      multiplies the value read back).
    * ``split``: the triangle conv(v, v+d1/q, v+d2/q) gets
      val(v + (s*d1 + r*d2)/(mq)) = val(v + s*d1/(mq)) + val(v + r*d2/(mq)),
      reading from its two edges at v.
    * ``zero``: the interior is identically zero.
    """

    kind: str
    face: Face
    scale: int = 1
    shift_units: tuple[int, int] = (0, 0)
    vertex_units: tuple[int, int] = (0, 0)
    d1: tuple[int, int] = (0, 0)
    d2: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if self.kind not in ("affine", "split", "zero"):
            raise ValueError(f"unknown lift kind {self.kind!r}")
        if self.face.kind not in TRIANGLE_KINDS:
            raise ValueError("lift records reconstruct triangle interiors")
        if self.kind == "affine" and self.scale not in (-1, 1):
            raise ValueError("affine lift scale must be +-1")

    def apply(self, grid: list[list[Fraction]], m: int) -> None:
        """Fill the interior grid values of the removed triangle in place."""
        n = m * self.face.q
        if self.kind == "split":
            vx, vy = self.vertex_units
            d1x, d1y = self.d1
            d2x, d2y = self.d2
            for s in range(1, m):
                a = grid[(vx * m + s * d1x) % n][(vy * m + s * d1y) % n]
                for r in range(1, m - s):
                    b = grid[(vx * m + r * d2x) % n][(vy * m + r * d2y) % n]
                    px = vx * m + s * d1x + r * d2x
                    py = vy * m + s * d1y + r * d2y
                    grid[px % n][py % n] = a + b
            return
        for px, py in _interior_grid_points(self.face, m):
            if self.kind == "zero":
                grid[px % n][py % n] = Fraction(0)
            else:
                sx = (self.scale * px + self.shift_units[0] * m) % n
                sy = (self.scale * py + self.shift_units[1] * m) % n
                grid[px % n][py % n] = self.scale * grid[sx][sy]

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "face": repr(self.face)}
        if self.kind == "affine":
            out["scale"] = self.scale
            out["shift_units"] = list(self.shift_units)
        elif self.kind == "split":
            out["vertex_units"] = list(self.vertex_units)
            out["d1"] = list(self.d1)
            out["d2"] = list(self.d2)
        return out


def _interior_grid_points(face: Face, m: int) -> Iterator[tuple[int, int]]:
    """Grid points of (1/(mq))Z^2 strictly inside a triangle, absolute units."""
    bx, by = face.ax * m, face.ay * m
    if face.kind is FaceKind.TRI_LOWER:
        for s in range(1, m):
            for r in range(1, m - s):
                yield bx + s, by + r
    elif face.kind is FaceKind.TRI_UPPER:
        for s in range(1, m):
            for r in range(m - s + 1, m):
                yield bx + s, by + r
    else:
        raise ValueError(f"{face} is not a triangle")


def face_grid_points(face: Face, m: int) -> list[tuple[int, int]]:
    """All (1/(mq))Z^2 points of a closed face, in absolute mq units."""
    bx, by = face.ax * m, face.ay * m
    kind = face.kind
    if kind is FaceKind.POINT:
        return [(bx, by)]
    if kind is FaceKind.EDGE_V:
        return [(bx, by + j) for j in range(m + 1)]
    if kind is FaceKind.EDGE_H:
        return [(bx + j, by) for j in range(m + 1)]
    if kind is FaceKind.EDGE_D:
        return [(bx + m - j, by + j) for j in range(m + 1)]
    if kind is FaceKind.TRI_LOWER:
        return [
            (bx + s, by + r) for s in range(m + 1) for r in range(m + 1 - s)
        ]
    return [
        (bx + s, by + r) for s in range(m + 1) for r in range(m - s, m + 1)
    ]


# ---------------------------------------------------------------------------
# State.
# ---------------------------------------------------------------------------


@dataclass
class PerturbationSpaceState:
    """The mutable (E, Z, P) triple plus the lift log and a trace.

    Tuples are keyed by canonical key, so E never stores two translates of
    the same constraint.  Z and P hold faces canonicalized into the
    fundamental domain; tuple faces may leave it, with membership checks
    going through ``canonical_face``.
    """

    q: int
    tuples: dict = field(default_factory=dict)
    zeros: set = field(default_factory=set)
    domain: set = field(default_factory=set)
    lifts: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def add_zero(self, face: Face) -> None:
        for sub in face.closure():
            self.zeros.add(canonical_face(sub))

    def is_zero(self, face: Face) -> bool:
        return canonical_face(face) in self.zeros

    def add_tuple(self, tau: SevenTuple) -> bool:
        """Insert unless vacuous or already present; True if stored."""
        if _is_vacuous(tau):
            return False
        key = tau.canonical_key()
        if key in self.tuples:
            return False
        self.tuples[key] = tau
        return True

    def sorted_tuples(self) -> list[tuple[object, SevenTuple]]:
        return sorted(self.tuples.items())

    def log(self, step: str, **info) -> None:
        entry = {"step": step}
        entry.update(info)
        self.trace.append(entry)


def _is_vacuous(tau: SevenTuple) -> bool:
    """True when the tuple constrains nothing beyond the vertex zeros.

    With exactly two non-point faces of opposite sign, the sweep is a
    translation; if the faces agree modulo Z^2 the relation reads
    theta(x) = theta(x + z) for z in Z^2, which holds for every periodic
    function.  (Same-sign sweeps are point reflections and genuinely couple
    values, and a reflection cannot map a face to a translate of itself
    without changing its kind, except for edges where the constraint is then
    real, so only the opposite-sign case is dropped.)
    """
    nonpoint = [p for p in range(3) if tau.faces[p].kind is not FaceKind.POINT]
    if len(nonpoint) != 2:
        return False
    i, j = nonpoint
    if tau.sigma[i] != -tau.sigma[j]:
        return False
    return canonical_face(tau.faces[i]) == canonical_face(tau.faces[j])


def init_state(pi: PwlFunction) -> PerturbationSpaceState:
    """E = all additivity tuples, Z = lattice vertices, P = every face."""
    report = finite_minimality(FiniteProblem.from_pwl(pi, 1))
    if not report.minimal:
        raise ValueError(
            f"the reduction pipeline needs a minimal function "
            f"(violates {report.violated})"
        )
    q = pi.q
    state = PerturbationSpaceState(q=q)
    state.domain = set(enumerate_fundamental_faces(q))
    for ax in range(q):
        for ay in range(q):
            state.zeros.add(Face(FaceKind.POINT, ax, ay, q))
    dropped = 0
    for tau in enumerate_additive(pi):
        if not state.add_tuple(tau):
            dropped += 1
    state.log(
        "init",
        tuples=len(state.tuples),
        vacuous_dropped=dropped,
        zeros=len(state.zeros),
        domain=len(state.domain),
    )
    return state


# ---------------------------------------------------------------------------
# Steps 1 and 2.
# ---------------------------------------------------------------------------


def step1_drop_point_triples(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Point-point-point tuples relate only vertex values, all zero."""
    removed = [k for k, tau in state.sorted_tuples() if classify_kinds(tau) == 1]
    for key in removed:
        del state.tuples[key]
    state.log("step1", removed=len(removed))
    return state


def step2_fulldim_to_zeros(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Three triangles, or three same-direction edges, force zeros.

    The sweep of such a tuple moves each argument along two independent
    directions (or one direction shared by all three edges), which pins the
    perturbation to be affine there; with zero boundary values it vanishes
    on the closures of all three faces.
    """
    removed = 0
    for key, tau in state.sorted_tuples():
        if classify_kinds(tau) != 7:
            continue
        for face in tau.faces:
            state.add_zero(face)
        del state.tuples[key]
        removed += 1
    state.log("step2", removed=removed, zeros=len(state.zeros))
    return state


# ---------------------------------------------------------------------------
# Step 3: edge + triangle + triangle.
# ---------------------------------------------------------------------------

_EDGE_PERM_TO_MIDDLE = {0: (1, 0, 2), 1: (0, 1, 2), 2: (0, 2, 1)}
_TRANSVERSAL = {
    FaceKind.EDGE_H: (FaceKind.EDGE_V,),
    FaceKind.EDGE_V: (FaceKind.EDGE_H,),
    FaceKind.EDGE_D: (FaceKind.EDGE_V, FaceKind.EDGE_H),
}


def step3_split_edge_tri_tri(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Replace each (triangle, edge, triangle) tuple by smaller ones.

    The edge direction sweeps through both triangles, so the perturbation is
    constant along it on I, J and K; the same-direction edges I1, J, K1
    become zero.  Two edge-edge-triangle tuples and one edge-point-edge
    tuple then carry the remaining content of the constraint.
    """
    processed = 0
    while True:
        target = None
        for key, tau in state.sorted_tuples():
            if classify_kinds(tau) == 5:
                target = (key, tau)
                break
        if target is None:
            break
        key, tau = target
        epos = next(
            p for p in range(3) if tau.faces[p].kind in EDGE_KINDS
        )
        tau = tau.permuted(_EDGE_PERM_TO_MIDDLE[epos])
        if tau.sigma[0] < 0:
            tau = tau.negated()
        if tau.sigma not in ((1, 1, -1), (1, -1, 1)) or tau.t_units != (0, 0):
            raise PipelineError(
                f"edge-triangle-triangle tuple in unexpected form: {tau}"
            )
        tri_i, edge_j, tri_k = tau.faces
        sigma = tau.sigma
        i1 = triangle_edge_of_kind(tri_i, edge_j.kind)
        k1 = triangle_edge_of_kind(tri_k, edge_j.kind)
        built = None
        for trans in _TRANSVERSAL[edge_j.kind]:
            i2 = triangle_edge_of_kind(tri_i, trans)
            k2 = triangle_edge_of_kind(tri_k, trans)
            t1 = unique_valid_t((edge_j, i2, tri_i), sigma)
            t2 = unique_valid_t((edge_j, k2, tri_k), sigma)
            if t1 is None or t2 is None:
                continue
            tau3 = None
            for ux, uy in sorted(edge_j.vertices_units()):
                cand = SevenTuple(
                    (i2, Face(FaceKind.POINT, ux, uy, state.q), k2),
                    sigma,
                    (0, 0),
                )
                if is_valid(cand):
                    tau3 = cand
                    break
            if tau3 is None:
                continue
            built = (
                SevenTuple((edge_j, i2, tri_i), sigma, t1),
                SevenTuple((edge_j, k2, tri_k), sigma, t2),
                tau3,
            )
            break
        if built is None:
            raise PipelineError(
                f"no transversal split found for {tau}; the edge-direction "
                f"reduction cannot proceed"
            )
        del state.tuples[key]
        for face in (i1, edge_j, k1):
            state.add_zero(face)
        for new in built:
            state.add_tuple(new)
        processed += 1
    state.log("step3", processed=processed, zeros=len(state.zeros))
    return state


# ---------------------------------------------------------------------------
# Step 4: triangle + point + triangle.
# ---------------------------------------------------------------------------

_PERM_TO_FRONT = {0: (0, 1, 2), 1: (1, 0, 2), 2: (2, 0, 1)}


def _find_position_of(tau: SevenTuple, canon: Face) -> Optional[int]:
    for p in range(3):
        if tau.faces[p].kind is canon.kind and canonical_face(tau.faces[p]) == canon:
            return p
    return None


def step4_project_tri_point_tri(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Project one triangle of each (triangle, point, triangle) tuple away.

    The sweep x -> scale*x + shift maps the removed triangle I bijectively
    onto the survivor K, and the point's value is zero, so values on I are
    +-1 times values on K.  Every other tuple mentioning I is rewritten onto
    K, the zero status transfers, three edge-pair shadow tuples keep the
    boundary constraints, and the affine rule is recorded as a lift.
    """
    processed = 0
    q = state.q
    while True:
        target = None
        for key, tau in state.sorted_tuples():
            if classify_kinds(tau) == 4:
                target = (key, tau)
                break
        if target is None:
            break
        key, tau = target
        ppos = next(
            p for p in range(3) if tau.faces[p].kind is FaceKind.POINT
        )
        tau = tau.permuted(_EDGE_PERM_TO_MIDDLE[ppos])
        if canonical_face(tau.faces[0]) == canonical_face(tau.faces[2]):
            raise PipelineError(
                f"self-paired triangle tuple should have been dropped as "
                f"vacuous: {tau}"
            )
        # keep the canonically smaller triangle; remove the one in front
        if canonical_face(tau.faces[0]) < canonical_face(tau.faces[2]):
            tau = tau.permuted((2, 1, 0))
        tri_i, point, tri_k = tau.faces
        s1, s2, s3 = tau.sigma
        t = tau.t_units
        u = point.vertices_units()[0]
        canon_i = canonical_face(tri_i)

        # (a) rewrite every other tuple mentioning a translate of I onto K
        rewritten = 0
        while True:
            hit = None
            for okey, other in state.sorted_tuples():
                if okey == key:
                    continue
                pos = _find_position_of(other, canon_i)
                if pos is not None:
                    hit = (okey, other, pos)
                    break
            if hit is None:
                break
            okey, other, pos = hit
            del state.tuples[okey]
            while True:
                pos = _find_position_of(other, canon_i)
                if pos is None:
                    break
                face = other.faces[pos]
                other = other.with_face_translated(
                    pos, (tri_i.ax - face.ax) // q, (tri_i.ay - face.ay) // q
                )
                other = other.permuted(_PERM_TO_FRONT[pos])
                sp = other.sigma
                tp = other.t_units
                new_sigma = (-s1 * s3 * sp[0],) + sp[1:]
                new_t = (
                    tp[0] - sp[0] * s1 * t[0] + sp[0] * s1 * s2 * u[0],
                    tp[1] - sp[0] * s1 * t[1] + sp[0] * s1 * s2 * u[1],
                )
                other = SevenTuple(
                    (tri_k,) + other.faces[1:], new_sigma, new_t
                )
                if not is_valid(other):
                    raise PipelineError(
                        f"rewriting onto the surviving triangle produced an "
                        f"invalid tuple: {other}"
                    )
            state.add_tuple(other)
            rewritten += 1

        # (b) transfer the zero constraint
        if canon_i in state.zeros:
            state.zeros.discard(canon_i)
            state.add_zero(tri_k)

        # (c) replace the tuple by its three edge-pair shadows
        del state.tuples[key]
        for kind in EDGE_KINDS:
            shadow = SevenTuple(
                (
                    triangle_edge_of_kind(tri_i, kind),
                    point,
                    triangle_edge_of_kind(tri_k, kind),
                ),
                tau.sigma,
                t,
            )
            if not is_valid(shadow):
                raise PipelineError(f"shadow tuple is not valid: {shadow}")
            state.add_tuple(shadow)

        # (d) remove I from the domain, (e) record the lift
        state.domain.discard(canon_i)
        scale = -s1 * s3
        shift = (s3 * (t[0] - s2 * u[0]), s3 * (t[1] - s2 * u[1]))
        state.lifts.append(
            LiftRecord(
                kind="affine", face=tri_i, scale=scale, shift_units=shift
            )
        )
        processed += 1
        state.log(
            "step4",
            removed_face=repr(canon_i),
            rewritten=rewritten,
            scale=scale,
            shift_units=list(shift),
        )
    state.log("step4-done", processed=processed, domain=len(state.domain))
    return state


# ---------------------------------------------------------------------------
# Step 5: edge + edge + triangle.
# ---------------------------------------------------------------------------

_TRI_PERM_TO_END = {0: (1, 2, 0), 1: (0, 2, 1), 2: (0, 1, 2)}


def _is_canonical6(tau: SevenTuple) -> bool:
    """(K1, K2, K) with both edges owned by a fundamental-domain K."""
    if tau.faces[2].kind not in TRIANGLE_KINDS:
        return False
    if tau.sigma != (1, 1, -1):
        return False
    tri = tau.faces[2]
    if canonical_mod_lattice(tri)[1] != (0, 0):
        return False
    edges = set(triangle_edges(tri))
    return tau.faces[0] in edges and tau.faces[1] in edges


def step5_canonicalize(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Rewrite each mixed edge-edge-triangle tuple into canonical form.

    The constraint moves onto the triangle's own two edges of the same
    directions: separating each original edge at a well-chosen vertex of the
    other yields two edge-point-edge tuples, and what remains of the joint
    sweep is (K1, K2, K) with signs (1, 1, -1).
    """
    processed = 0
    while True:
        target = None
        for key, tau in state.sorted_tuples():
            if classify_kinds(tau) == 6 and not _is_canonical6(tau):
                target = (key, tau)
                break
        if target is None:
            break
        key, tau = target
        tpos = next(
            p for p in range(3) if tau.faces[p].kind in TRIANGLE_KINDS
        )
        tau = tau.permuted(_TRI_PERM_TO_END[tpos])
        edge_i, edge_j, tri = tau.faces
        sigma = tau.sigma
        t = tau.t_units
        k1 = triangle_edge_of_kind(tri, edge_i.kind)
        k2 = triangle_edge_of_kind(tri, edge_j.kind)
        found = None
        for ux, uy in sorted(edge_i.vertices_units()):
            for vx, vy in sorted(edge_j.vertices_units()):
                w = (
                    sigma[2] * (t[0] - sigma[1] * vx - sigma[0] * ux),
                    sigma[2] * (t[1] - sigma[1] * vy - sigma[0] * uy),
                )
                tau1 = SevenTuple((k1, k2, tri), (1, 1, -1), w)
                tau2 = SevenTuple(
                    (edge_i, Face(FaceKind.POINT, vx, vy, state.q), k1),
                    sigma,
                    t,
                )
                tau3 = SevenTuple(
                    (Face(FaceKind.POINT, ux, uy, state.q), edge_j, k2),
                    sigma,
                    t,
                )
                if is_valid(tau1) and is_valid(tau2) and is_valid(tau3):
                    found = (tau1, tau2, tau3)
                    break
            if found:
                break
        if found is None:
            raise PipelineError(f"no separating vertices found for {tau}")
        tau1, tau2, tau3 = found
        _, (zx, zy) = canonical_mod_lattice(tri)
        if (zx, zy) != (0, 0):
            for p in range(3):
                tau1 = tau1.with_face_translated(p, zx, zy)
        del state.tuples[key]
        state.add_tuple(tau1)
        state.add_tuple(tau2)
        state.add_tuple(tau3)
        processed += 1
    state.log("step5a", processed=processed)
    return state


def step5_dedupe_and_project(state: PerturbationSpaceState) -> PerturbationSpaceState:
    """Resolve the canonical triangle tuples, triangle by triangle.

    Two canonical tuples on one triangle share an edge; both constraints
    force the perturbation to be affine along that shared edge's direction
    through the triangle, so the shared edge is zero and one tuple is
    redundant.  A triangle held by exactly one tuple is projected out of the
    domain: its interior values are the sums of its two edge values along
    the parallelogram through the shared vertex, recorded as a split lift,
    and the constraint descends to the three edges.
    """
    deduped = 0
    projected = 0
    while True:
        groups: dict[Face, list] = {}
        for key, tau in state.sorted_tuples():
            cls = classify_kinds(tau)
            if cls == 6:
                if not _is_canonical6(tau):
                    raise PipelineError(
                        f"non-canonical edge-edge-triangle tuple after "
                        f"canonicalization: {tau}"
                    )
                groups.setdefault(tau.faces[2], []).append((key, tau))
            elif cls not in (2, 3):
                raise PipelineError(
                    f"unexpected class-{cls} tuple during triangle "
                    f"resolution: {tau}"
                )
        if not groups:
            break
        tri, items = sorted(groups.items())[0]
        if len(items) >= 2:
            (_, first), (second_key, second) = items[0], items[1]
            shared = {first.faces[0], first.faces[1]} & {
                second.faces[0],
                second.faces[1],
            }
            if len(shared) != 1:
                raise PipelineError(
                    f"canonical tuples on {tri} share {len(shared)} edges; "
                    f"expected exactly one"
                )
            del state.tuples[second_key]
            state.add_zero(shared.pop())
            deduped += 1
            continue
        (key, tau), = items
        k1, k2 = tau.faces[0], tau.faces[1]
        vset = set(k1.vertices_units()) & set(k2.vertices_units())
        if len(vset) != 1:
            raise PipelineError(
                f"edges of the canonical tuple {tau} do not share exactly "
                f"one vertex"
            )
        v = vset.pop()
        if tau.t_units != v:
            raise PipelineError(
                f"canonical tuple translation {tau.t_units} is not the "
                f"shared vertex {v} of its edges"
            )
        k3 = next(e for e in triangle_edges(tri) if e not in (k1, k2))
        replacement = SevenTuple((k1, k2, k3), (1, 1, -1), tau.t_units)
        if not is_valid(replacement):
            raise PipelineError(
                f"edge-only replacement is not valid: {replacement}"
            )
        del state.tuples[key]
        state.add_tuple(replacement)
        canon_tri = canonical_face(tri)
        state.domain.discard(canon_tri)
        state.zeros.discard(canon_tri)
        ends1 = [p for p in k1.vertices_units() if p != v]
        ends2 = [p for p in k2.vertices_units() if p != v]
        state.lifts.append(
            LiftRecord(
                kind="split",
                face=tri,
                vertex_units=v,
                d1=(ends1[0][0] - v[0], ends1[0][1] - v[1]),
                d2=(ends2[0][0] - v[0], ends2[0][1] - v[1]),
            )
        )
        projected += 1
    state.log("step5b", deduped=deduped, projected=projected)
    return state


# ---------------------------------------------------------------------------
# Step 6: decide.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepSixOutcome:
    verdict: str
    certificate: Optional[GridFunction]


def _replay_lifts(state: PerturbationSpaceState, grid: list[list[Fraction]], m: int) -> None:
    """Reconstruct removed-triangle interiors, newest projection first."""
    for record in reversed(state.lifts):
        record.apply(grid, m)


def step6_decide(state: PerturbationSpaceState, m: int = 3) -> StepSixOutcome:
    """Decide the residual space: free triangle bump or edge system kernel.

    A triangle still in the domain but not forced to zero appears in no
    remaining tuple (they hold only edges and points), so a bump at one of
    its interior grid points perturbs freely.  Otherwise every constraint
    lives on edges: the class-2/3 tuples translate to a functional-equation
    system whose nontrivial solutions, if any, give an edge perturbation.
    """
    if not isinstance(m, int) or m < 3:
        raise ValueError(f"m must be an integer >= 3, got {m!r}")
    for _, tau in state.sorted_tuples():
        cls = classify_kinds(tau)
        if cls not in (2, 3):
            raise PipelineError(
                f"pipeline incomplete: class-{cls} tuple remains: {tau}"
            )
    q = state.q
    n = m * q
    triangles = sorted(
        f for f in state.domain if f.kind in TRIANGLE_KINDS
    )
    free = [tri for tri in triangles if tri not in state.zeros]
    if free:
        tri = free[0]
        grid = [[Fraction(0)] * n for _ in range(n)]
        if tri.kind is FaceKind.TRI_LOWER:
            px, py = tri.ax * m + 1, tri.ay * m + 1
        else:
            px, py = tri.ax * m + m - 1, tri.ay * m + m - 1
        grid[px % n][py % n] = Fraction(1)
        _replay_lifts(state, grid, m)
        state.log("step6a", free_triangle=repr(tri))
        return StepSixOutcome(
            "NOT-EXTREME", GridFunction.from_values(n, 2, grid)
        )
    for tri in triangles:
        for edge in triangle_edges(tri):
            state.add_zero(edge)
        state.zeros.discard(tri)
        state.domain.discard(tri)
        state.lifts.append(LiftRecord(kind="zero", face=tri))
    edges = sorted(f for f in state.domain if f.kind in EDGE_KINDS)
    zero_edges = [e for e in edges if e in state.zeros]
    free_edges = [e for e in edges if e not in state.zeros]
    spec, slots = tuples_to_system(
        [tau for _, tau in state.sorted_tuples()],
        zero_edges=zero_edges,
        required_slots=free_edges,
    )
    basis = solve_finite(spec, m) if spec.ell else []
    state.log(
        "step6b",
        zero_edges=len(zero_edges),
        free_edges=len(free_edges),
        equations=len(spec.equations),
        kernel_dimension=len(basis),
    )
    if not basis:
        return StepSixOutcome("EXTREME", None)
    profiles = lift_pwl(basis[0])
    grid = [[Fraction(0)] * n for _ in range(n)]
    for edge, slot in sorted(slots.items()):
        profile = profiles[slot]
        base, tip = edge.vertices_units()
        dx, dy = tip[0] - base[0], tip[1] - base[1]
        for j in range(m + 1):
            grid[(base[0] * m + j * dx) % n][(base[1] * m + j * dy) % n] = (
                profile.at(Fraction(j, m))
            )
    _replay_lifts(state, grid, m)
    return StepSixOutcome("NOT-EXTREME", GridFunction.from_values(n, 2, grid))


# ---------------------------------------------------------------------------
# Driver.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    verdict: str
    certificate: Optional[GridFunction]
    m: int
    route: str
    trace: tuple


def run_pipeline(
    pi: PwlFunction, m: int = 3, grid_precheck: bool = True
) -> PipelineResult:
    """Decide extremality by coarse-grid kernel plus the step engine.

    The grid check covers perturbations visible on the (1/q)Z^2 lattice; the
    steps cover those vanishing there.  With ``grid_precheck=False`` only
    the second half runs, which tests the step machinery but weakens the
    verdict to lattice-vanishing perturbations.
    """
    if not isinstance(m, int) or m < 3:
        raise ValueError(f"m must be an integer >= 3, got {m!r}")
    state = init_state(pi)
    if grid_precheck:
        kernel = extremality_kernel(FiniteProblem.from_pwl(pi, 1))
        if kernel.dimension > 0:
            cert = restrict(interpolate(kernel.basis[0]), m)
            state.log("grid-precheck", kernel_dimension=kernel.dimension)
            return PipelineResult(
                "NOT-EXTREME", cert, m, "grid-kernel", tuple(state.trace)
            )
        state.log("grid-precheck", kernel_dimension=0)
    step1_drop_point_triples(state)
    step2_fulldim_to_zeros(state)
    step3_split_edge_tri_tri(state)
    step4_project_tri_point_tri(state)
    step5_canonicalize(state)
    step5_dedupe_and_project(state)
    outcome = step6_decide(state, m)
    return PipelineResult(
        outcome.verdict,
        outcome.certificate,
        m,
        "steps",
        tuple(state.trace),
    )


def verify_certificate(
    pi: PwlFunction, pert: GridFunction, m: int = 3
) -> tuple[bool, Optional[Fraction]]:
    """Check a grid perturbation by exact minimality of both shifts.

    Searches epsilon over 1, 1/2, ..., 2**-20 for the first value where
    pi + eps*pert and pi - eps*pert both pass the finite minimality test at
    level mq.  A zero perturbation, or one moving 0 or f, is rejected
    outright.
    """
    n = m * pi.q
    if pert.dims != 2 or pert.n != n:
        raise ValueError(
            f"certificate must be a 2d grid function at level {n}, got "
            f"dims={pert.dims}, n={pert.n}"
        )
    if pert.is_zero():
        return False, None
    fx, fy = pi.f_units()
    f_index = (fx * m, fy * m)
    if pert.value_at_units(0, 0) != 0 or pert.value_at_units(*f_index) != 0:
        return False, None
    base = restrict(pi, m)
    eps = Fraction(1)
    for _ in range(21):
        ok = True
        for sign in (1, -1):
            shifted = base.combined(pert, sign * eps)
            problem = FiniteProblem.from_grid(shifted, f_index)
            if not finite_minimality(problem).minimal:
                ok = False
                break
        if ok:
            return True, eps
        eps = eps / 2
    return False, None
