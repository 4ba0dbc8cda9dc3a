"""The 2-graph whose Cuntz-Krieger algebra is the q = 0 limit of SU_q(3).

Red edges (colour 1) carry the labels A, B, C; blue edges (colour 2) carry
X, Y, Z.  Vertices are ordered CZ, BZ, CY, BX, AY, AX.
"""

from __future__ import annotations

import numpy as np

from .core import (
    Edge,
    FactorizationSquare,
    FactorizationTable,
    KGraph,
    Skeleton,
    Vertex,
    count_matrix,
    transition_matrix,
    validate_factorization,
)
from .textio import dump

RED, BLUE = 1, 2
VERTEX_ORDER = ("CZ", "BZ", "CY", "BX", "AY", "AX")
RED_LABELS = ("A", "B", "C")
BLUE_LABELS = ("X", "Y", "Z")

# (label, source, range)
RED_EDGES = (
    ("C", "CZ", "CZ"), ("B", "BZ", "BZ"), ("C", "CY", "CY"),
    ("B", "BX", "BX"), ("A", "AY", "AY"), ("A", "AX", "AX"),
    ("B", "CZ", "BZ"), ("B", "CY", "BX"), ("A", "BZ", "AY"),
    ("A", "CY", "AY"), ("A", "CZ", "AY"), ("A", "BX", "AX"),
)
BLUE_EDGES = (
    ("Z", "CZ", "CZ"), ("Z", "BZ", "BZ"), ("Y", "CY", "CY"),
    ("X", "BX", "BX"), ("Y", "AY", "AY"), ("X", "AX", "AX"),
    ("Y", "CZ", "CY"), ("X", "BZ", "BX"), ("X", "CY", "BX"),
    ("Y", "BZ", "AY"), ("X", "CZ", "BX"), ("X", "AY", "AX"),
)

# Where a blue-then-red word has two red-then-blue candidates, the labels
# decide: e.g. Z then A equals B then Y (the operator identity AZ = YB).
LABEL_RULES = {
    ("Z", "A"): ("B", "Y"),
    ("Y", "A"): ("A", "Y"),
    ("Y", "B"): ("C", "X"),
    ("X", "B"): ("B", "X"),
}

# Printed reference data, rows and columns in the stated vertex order.
REFERENCE_M_R = np.array(
    [[1, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0],
     [1, 1, 1, 1, 0, 0], [0, 0, 1, 0, 1, 0], [0, 0, 0, 0, 1, 1]],
    dtype=np.int64,
)
REFERENCE_M_B = np.array(
    [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [1, 0, 1, 0, 0, 0],
     [0, 1, 0, 1, 0, 0], [1, 1, 1, 0, 1, 0], [0, 0, 0, 1, 0, 1]],
    dtype=np.int64,
)
REFERENCE_PRODUCT = np.array(
    [[1, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0], [1, 0, 1, 0, 0, 0],
     [2, 2, 1, 1, 0, 0], [2, 1, 2, 0, 1, 0], [1, 1, 1, 1, 1, 1]],
    dtype=np.int64,
)

# The printed matrices use BZ and CY in swapped positions and exchange the
# colour names; this permutation (0-based) maps between the two layouts.
REFERENCE_PERMUTATION = (0, 2, 1, 3, 4, 5)


def skeleton() -> Skeleton:
    vertices = tuple(Vertex(i + 1, v) for i, v in enumerate(VERTEX_ORDER))
    edges = [Edge(i + 1, RED, s, r, lab) for i, (lab, s, r) in enumerate(RED_EDGES)]
    edges += [Edge(len(RED_EDGES) + i + 1, BLUE, s, r, lab) for i, (lab, s, r) in enumerate(BLUE_EDGES)]
    return Skeleton(2, vertices, tuple(edges))


def _pairs(s: Skeleton, first: int, second: int) -> list[tuple[Edge, Edge]]:
    return [(a, b) for a in s.edges_of_color(first) for b in s.outgoing(a.range, second)]


def table(s: Skeleton | None = None) -> FactorizationTable:
    """Forced squares plus the four label rules, one square per blue-then-red pair."""
    s = s or skeleton()
    red_first: dict[tuple[str, str], list[tuple[Edge, Edge]]] = {}
    for a, b in _pairs(s, RED, BLUE):
        red_first.setdefault((a.source, b.range), []).append((a, b))
    squares = []
    for b, a in _pairs(s, BLUE, RED):
        candidates = red_first.get((b.source, a.range), [])
        if len(candidates) > 1:
            want = LABEL_RULES[(b.label, a.label)]
            candidates = [c for c in candidates if (c[0].label, c[1].label) == want]
        if len(candidates) != 1:
            raise AssertionError(f"no unique partner for {b.name}, {a.name}")
        r, x = candidates[0]
        squares.append(FactorizationSquare(r, x, b, a))
    squares.sort(key=lambda sq: (sq.first_lo.id, sq.second_lo.id))
    return FactorizationTable(tuple(squares))


def build() -> KGraph:
    s = skeleton()
    return validate_factorization(s, table(s))


def reference_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The printed (M_R, M_B, M_R M_B), verbatim."""
    return REFERENCE_M_R.copy(), REFERENCE_M_B.copy(), REFERENCE_PRODUCT.copy()


def to_reference_layout(M: np.ndarray) -> np.ndarray:
    p = list(REFERENCE_PERMUTATION)
    return np.asarray(M)[np.ix_(p, p)]


def compare_with_reference(s: Skeleton | None = None) -> dict[str, bool]:
    """Exact equality with the printed matrices after permuting and swapping colours."""
    s = s or skeleton()
    red, blue = transition_matrix(s, RED), transition_matrix(s, BLUE)
    m_r, m_b, prod = reference_matrices()
    return {
        "printed_red_is_our_blue": bool(np.array_equal(to_reference_layout(blue), m_r)),
        "printed_blue_is_our_red": bool(np.array_equal(to_reference_layout(red), m_b)),
        "product": bool(np.array_equal(to_reference_layout(red @ blue), prod)),
        "commute": bool(np.array_equal(red @ blue, blue @ red)),
    }


def ambiguous_morphisms(s: Skeleton | None = None) -> list[tuple[str, str]]:
    """(source, range) pairs carrying two degree-(1,1) morphisms."""
    s = s or skeleton()
    counts = count_matrix(s, (1, 1))
    labels = s.labels
    return [(labels[u], labels[v]) for u in range(len(labels)) for v in range(len(labels)) if counts[v, u] == 2]


def export(path=None) -> str:
    s = skeleton()
    text = dump(s, table(s))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
