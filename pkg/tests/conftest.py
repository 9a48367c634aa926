from __future__ import annotations

import random
from fractions import Fraction

import pytest

from groupcut.lattice import Face, FaceKind, LatticePoint, enumerate_fundamental_faces
from groupcut.pwl import Pwl1Function, PwlFunction

# The running two-dimensional example: a minimal function on P_5 with
# f = (2/5, 2/5).  FIGURE_MATRIX[iy][ix] is 4 * pi(ix/5, iy/5), one closed
# period (top row and right column repeat the opposite side).
FIGURE_MATRIX = [
    [0, 2, 2, 2, 2, 0],
    [2, 2, 2, 3, 1, 2],
    [2, 2, 4, 2, 2, 2],
    [2, 2, 2, 1, 2, 2],
    [2, 2, 2, 2, 3, 2],
    [0, 2, 2, 2, 2, 0],
]


def figure_function() -> PwlFunction:
    values = [
        [Fraction(FIGURE_MATRIX[iy][ix], 4) for iy in range(5)] for ix in range(5)
    ]
    return PwlFunction.from_values(
        5, values, f=("2/5", "2/5"), minimal_candidate=True
    )


def gmic_1row(q: int = 2) -> Pwl1Function:
    # The classic single-row function with f = 1/2: rises linearly to 1 at f,
    # falls back to 0 at 1.
    if q != 2:
        raise ValueError("this helper builds the q = 2 instance")
    return Pwl1Function.from_values(2, [0, 1], f="1/2", minimal_candidate=True)


def diag_lift_q2() -> PwlFunction:
    # The two-row lift pi(x, y) = phi(x + y) of the q = 2 single-row cut,
    # with f = (1/2, 0).  Extreme (kernel dimension 0 at m = 3 and m = 4).
    values = [[0, 1], [1, 0]]
    return PwlFunction.from_values(
        2, values, f=("1/2", "0"), minimal_candidate=True
    )


# Values k/4 for k in 1..4; avoiding 0 keeps random functions positive away
# from their forced zeros, which leaves subadditivity slack for perturbing.
def pwl2_document(pi: PwlFunction, name: str | None = None) -> dict:
    doc = {
        "kind": "pwl2",
        "q": pi.q,
        "f": [str(pi.f.x), str(pi.f.y)],
        "values": [[str(v) for v in row] for row in pi.values],
    }
    if name is not None:
        doc["name"] = name
    return doc


def figure_document() -> dict:
    return pwl2_document(figure_function(), name="p5-figure")


def gmic_document() -> dict:
    return {
        "kind": "pwl1",
        "q": 2,
        "f": "1/2",
        "values": ["0", "1"],
        "name": "gmic-half",
    }


CORPUS_PALETTE = [Fraction(k, 4) for k in range(1, 5)]


def random_minimal(q: int, rng: random.Random, tries: int = 4000):
    """A random minimal function on P_q, or None if the search is unlucky.

    Vertex values are drawn from CORPUS_PALETTE with the symmetry
    pi(x) + pi(f - x) = 1 built in, then rejection-filtered through the
    exact finite minimality test.
    """
    from groupcut.groups import FiniteProblem, finite_minimality

    for _ in range(tries):
        fq = (rng.randrange(q), rng.randrange(q))
        if fq == (0, 0):
            continue
        vals: list[list[Fraction | None]] = [[None] * q for _ in range(q)]
        vals[0][0] = Fraction(0)
        vals[fq[0]][fq[1]] = Fraction(1)
        for ix in range(q):
            for iy in range(q):
                if vals[ix][iy] is not None:
                    continue
                px, py = (fq[0] - ix) % q, (fq[1] - iy) % q
                if (px, py) == (ix, iy):
                    vals[ix][iy] = Fraction(1, 2)
                else:
                    v = rng.choice(CORPUS_PALETTE)
                    vals[ix][iy] = v
                    vals[px][py] = 1 - v
        if any(v is None for row in vals for v in row):
            continue
        try:
            pi = PwlFunction.from_values(
                q,
                vals,
                f=(Fraction(fq[0], q), Fraction(fq[1], q)),
                minimal_candidate=True,
            )
        except ValueError:
            continue
        if finite_minimality(FiniteProblem.from_pwl(pi, 1)).minimal:
            return pi
    return None


@pytest.fixture
def fig_fn() -> PwlFunction:
    return figure_function()


def random_face(rng: random.Random, q: int, window: int = 1) -> Face:
    kind = rng.choice(list(FaceKind))
    ax = rng.randrange(-window * q, (window + 1) * q)
    ay = rng.randrange(-window * q, (window + 1) * q)
    return Face(kind, ax, ay, q)


def random_fundamental_face(rng: random.Random, q: int) -> Face:
    kind = rng.choice(list(FaceKind))
    return Face(kind, rng.randrange(q), rng.randrange(q), q)
