"""Cuntz-Krieger families built from the q = 0 limit operators.

Vertex projections are ``m m* n n*`` for the vertex ``mn``; the edge ``f``
labelled ``e`` gets ``S_f = P_{r(f)} e P_{s(f)}``.  A word ``[e1, e2]`` (e1
traversed first) acts as ``S_{e2} S_{e1}``.  Everything is compared on the
core subspace, where the truncated operators agree with the untruncated ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .core import Edge, KGraph, Path, count_matrix, normal_form, words_of_length
from .errors import ConfigurationError, ParameterError
from .graded import (
    CoreSubspace,
    GradedOperator,
    basis_index,
    core_compression,
    core_residual,
    elementary,
    op_norm_core,
)
from .qdeform import hat_ops
from .report import VerificationReport

LABELS = ("A", "B", "C", "X", "Y", "Z")
RED_LABELS = ("A", "B", "C")
BLUE_LABELS = ("X", "Y", "Z")
VERTICES = ("CZ", "BZ", "CY", "BX", "AY", "AX")
COLOR_DEGREE = {1: (1, 0), 2: (0, 1)}

IDENTITY_TOL = 1e-12
CK_TOL = 1e-10
NONZERO_THRESHOLD = 1e-8
POSITIVITY_TOL = 1e-12
CK4_DEGREES = ((1, 0), (0, 1), (1, 1), (2, 1), (1, 2))
CK4_RANDOM_SAMPLES = 3


def _deg_str(n: Sequence[int]) -> str:
    return ",".join(str(x) for x in n)


def _params(hat: Mapping[str, GradedOperator]):
    return next(iter(hat.values())).params


def printed_forms(N: int, d: int) -> dict[str, GradedOperator]:
    """Closed tensor forms of the vertex projections and the range/source projections."""
    e = elementary(N, 0.0)
    P, Q, I = e.P, e.Q, e.I
    p = _params(hat_ops(N, d))
    t = lambda *fs: GradedOperator.term(p, list(fs), (0, 0))  # noqa: E731
    return {
        "P_CZ": t(P, P, P),
        "P_CY": t(Q, P, P),
        "P_BZ": t(P, P, Q),
        "P_BX": t(Q, P, Q),
        "P_AY": t(Q, Q, P) + t(P, Q, I),
        "P_AX": t(Q, Q, Q),
        "A*A": t(I, I, I),
        "AA*": t(I, Q, I),
        "B*B": t(I, P, I),
        "BB*": t(I, P, Q),
        "C*C": t(I, P, P),
        "CC*": t(I, P, P),
        "X*X": t(I, I, I),
        "XX*": t(Q, I, Q),
        "Y*Y": t(I, I, P) + t(P, I, Q),
        "YY*": t(Q, I, P) + t(P, Q, I),
        "Z*Z": t(P, P, I),
        "ZZ*": t(P, P, I),
    }


def vertex_projections(hat: Mapping[str, GradedOperator]) -> dict[str, GradedOperator]:
    out = {}
    for v in VERTICES:
        m, n = hat[v[0]], hat[v[1]]
        out[v] = m @ m.H @ n @ n.H
    return out


def check_hat_identities(hat: Mapping[str, GradedOperator], tol: float = IDENTITY_TOL) -> VerificationReport:
    """Partial-isometry identities, printed projection forms and partitions of unity."""
    p = _params(hat)
    forms = printed_forms(p.N, p.d)
    proj = vertex_projections(hat)
    I = GradedOperator.identity(p)
    report = VerificationReport()
    for x in LABELS:
        v = hat[x]
        report.add(f"hat/{x}*{x}", core_residual(v.H @ v, forms[f"{x}*{x}"]), tol)
        report.add(f"hat/{x}{x}*", core_residual(v @ v.H, forms[f"{x}{x}*"]), tol)
        report.add(f"hat/partial_isometry/{x}", core_residual(v @ v.H @ v, v), tol)
        report.add(f"hat/degree/{x}", 0.0 if v.is_homogeneous else 1.0, 0.0, degree=v.degree)
    for v in VERTICES:
        report.add(f"hat/projection/{v}", core_residual(proj[v], forms[f"P_{v}"]), tol)
        report.add(f"hat/idempotent/{v}", core_residual(proj[v] @ proj[v], proj[v]), tol)
        report.add(f"hat/selfadjoint/{v}", core_residual(proj[v].H, proj[v]), tol)
    red = sum((hat[x] @ hat[x].H for x in RED_LABELS[1:]), hat["A"] @ hat["A"].H)
    blue = sum((hat[x] @ hat[x].H for x in BLUE_LABELS[1:]), hat["X"] @ hat["X"].H)
    report.add("hat/unity/red", core_residual(red, I), tol)
    report.add("hat/unity/blue", core_residual(blue, I), tol)
    total = sum((proj[v] for v in VERTICES[1:]), proj[VERTICES[0]])
    report.add("hat/unity/vertices", core_residual(total, I), tol)
    return report


# assignment --------------------------------------------------------------


@dataclass(frozen=True)
class CKAssignment:
    graph: KGraph
    vertex_projections: dict
    edge_isometries: dict

    @property
    def params(self):
        return next(iter(self.vertex_projections.values())).params

    def S(self, e: Edge) -> GradedOperator:
        return self.edge_isometries[e]

    def P(self, v: str) -> GradedOperator:
        return self.vertex_projections[v]

    def word_operator(self, word: Sequence[Edge]) -> GradedOperator:
        """``S_{e_n} ... S_{e_1}`` for the word ``[e_1, ..., e_n]``."""
        op = self.S(word[0])
        for e in word[1:]:
            op = self.S(e) @ op
        return op

    def path_operator(self, p: Path) -> GradedOperator:
        if p.is_identity:
            return self.P(p.source)
        return self.word_operator(p.edges)


def probe(hat: Mapping[str, GradedOperator], proj: Mapping[str, GradedOperator], label: str, source: str, range_: str) -> GradedOperator:
    return proj[range_] @ hat[label] @ proj[source]


def edge_operators(g: KGraph, hat: Mapping[str, GradedOperator]) -> CKAssignment:
    proj = vertex_projections(hat)
    isos = {}
    for e in g.skeleton.edges:
        if e.label not in hat:
            raise ConfigurationError(f"edge {e.name} has no operator for label {e.label!r}")
        isos[e] = probe(hat, proj, e.label, e.source, e.range)
    return CKAssignment(g, proj, isos)


def incidence(hat: Mapping[str, GradedOperator]) -> dict[tuple[str, str, str], float]:
    """Core norm of ``P_v2 e P_v1`` for every label and ordered vertex pair."""
    proj = vertex_projections(hat)
    core = CoreSubspace(_params(hat))
    norms = {}
    for label in LABELS:
        for s, r in product(VERTICES, repeat=2):
            op = probe(hat, proj, label, s, r)
            norms[(label, s, r)] = 0.0 if op.is_zero else op_norm_core(op, core)
    return norms


def check_incidence(g: KGraph, hat: Mapping[str, GradedOperator], threshold: float = NONZERO_THRESHOLD) -> VerificationReport:
    norms = incidence(hat)
    edges = {(e.label, e.source, e.range) for e in g.skeleton.edges}
    report = VerificationReport()
    zeros = [v for k, v in norms.items() if k not in edges]
    ones = [v for k, v in norms.items() if k in edges]
    derived = {k for k, v in norms.items() if v > threshold}
    report.flag(
        "incidence/adjacency",
        derived == edges,
        probes=len(norms),
        extra=sorted(derived - edges),
        missing=sorted(edges - derived),
    )
    report.add("incidence/max_zero", max(zeros), threshold)
    report.flag("incidence/min_nonzero", min(ones) > 0.9, min_nonzero=min(ones))
    for c, labels in ((1, RED_LABELS), (2, BLUE_LABELS)):
        M = np.zeros((6, 6), dtype=np.int64)
        for (lab, s, r), v in norms.items():
            if lab in labels and v > threshold:
                M[VERTICES.index(r), VERTICES.index(s)] += 1
        report.flag(f"incidence/transition/color{c}", np.array_equal(M, count_matrix(g.skeleton, COLOR_DEGREE[c])))
    return report


# Cuntz-Krieger relations -------------------------------------------------


def ck4_degrees(d: int, seed: int = 0, samples: int = CK4_RANDOM_SAMPLES) -> list[tuple[int, int]]:
    """The fixed small degrees plus seeded random ones with total length at most d - 2."""
    rng = np.random.default_rng(seed)
    fixed = list(CK4_DEGREES)
    pool = [(a, b) for a in range(d - 1) for b in range(d - 1) if 0 < a + b <= d - 2 and (a, b) not in fixed]
    picks = rng.choice(len(pool), size=min(samples, len(pool)), replace=False) if pool else []
    return fixed + [pool[i] for i in sorted(picks)]


def check_ck(a: CKAssignment, degrees: Sequence[Sequence[int]] | None = None, tol: float = CK_TOL) -> VerificationReport:
    g = a.graph
    s = g.skeleton
    p = a.params
    if degrees is None:
        degrees = ck4_degrees(p.d)
    for n in degrees:
        if sum(n) > p.d - 2:
            raise ParameterError(f"degree {tuple(n)} exceeds the truncation margin d - 2 = {p.d - 2}")
    report = VerificationReport()
    labels = s.labels
    for i, u in enumerate(labels):
        Pu = a.P(u)
        report.add(f"ck1/projection/{u}", max(core_residual(Pu @ Pu, Pu), core_residual(Pu.H, Pu)), tol)
        for v in labels[i + 1 :]:
            report.add(f"ck1/orthogonal/{u}|{v}", core_residual(Pu @ a.P(v)), tol)
    for word in words_of_length(s, 2):
        if word[0].color == word[1].color:
            continue
        nf = normal_form(g, word)
        report.add(
            f"ck2/{word[0].name}|{word[1].name}",
            core_residual(a.word_operator(word), a.path_operator(nf)),
            tol,
            normal_form=str(nf),
        )
    for e in s.edges:
        Se = a.S(e)
        report.add(f"ck3/{e.name}", core_residual(Se.H @ Se, a.P(e.source)), tol)
    for n in degrees:
        for v in labels:
            total = GradedOperator.zero(p)
            paths = g.enumerate_paths(v, tuple(n), "range")
            for path in paths:
                T = a.path_operator(path)
                total = total + T @ T.H
            report.add(f"ck4/{v}/{_deg_str(n)}", core_residual(total, a.P(v)), tol, paths=len(paths))
    hat = hat_ops(p.N, p.d)
    for label, total in sorted(_reconstruct(a).items()):
        report.add(f"ck/reconstruct/{label}", core_residual(total, hat[label]), tol)
    return report


def _reconstruct(a: CKAssignment) -> dict[str, GradedOperator]:
    out: dict[str, GradedOperator] = {}
    for e, S in a.edge_isometries.items():
        out[e.label] = out[e.label] + S if e.label in out else S
    return out


def check_gauge(a: CKAssignment, path_degrees: Sequence[Sequence[int]] = ((2, 1),)) -> VerificationReport:
    """Every edge operator is homogeneous of the degree of its colour."""
    report = VerificationReport()
    for e in a.graph.skeleton.edges:
        S = a.S(e)
        want = COLOR_DEGREE[e.color]
        report.flag(f"gauge/edge/{e.name}", S.is_homogeneous and S.degree == want, degree=S.degree, expected=want)
    for v in a.graph.skeleton.labels:
        P = a.P(v)
        report.flag(f"gauge/vertex/{v}", P.is_homogeneous and P.degree == (0, 0), degree=P.degree)
    for n in path_degrees:
        n = tuple(n)
        ok = True
        for v in a.graph.skeleton.labels:
            for path in a.graph.enumerate_paths(v, n, "range"):
                T = a.path_operator(path)
                ok &= T.is_homogeneous and T.degree == n
        report.flag(f"gauge/paths/{_deg_str(n)}", ok)
    return report


# relation list -----------------------------------------------------------

# (name, lhs word, rhs word); a word "BA" means the operator product B A, a
# trailing '*' marks an adjoint, rhs None means zero.
RELATIONS = (
    ("BA", None), ("B*A", None), ("YA", "AY"), ("CA", None), ("C*A", None),
    ("ZB", "BZ"), ("YB", "AZ"), ("ZA", None), ("Z*A", None),
    ("CB", None), ("C*B", None), ("AX", "XA"), ("AX*", "X*A"),
    ("YX", None), ("Y*X", None), ("BX", "XB"), ("ZX", None), ("Z*X", None),
    ("CY", "YC"), ("BY", "XC"), ("CX", None), ("C*X", None),
    ("ZY", None), ("Z*Y", None),
)


def word_product(hat: Mapping[str, GradedOperator], word: str) -> GradedOperator:
    factors = []
    for ch in word:
        if ch == "*":
            factors[-1] = factors[-1].H
        else:
            factors.append(hat[ch])
    out = factors[0]
    for f in factors[1:]:
        out = out @ f
    return out


def check_relation_list(hat: Mapping[str, GradedOperator], tol: float = IDENTITY_TOL) -> VerificationReport:
    report = VerificationReport()
    for lhs, rhs in RELATIONS:
        L = word_product(hat, lhs)
        R = word_product(hat, rhs) if rhs else None
        report.add(f"rel/{lhs}={rhs or '0'}", core_residual(L, R), tol)
    core = CoreSubspace(_params(hat))
    for x in LABELS:
        v = hat[x]
        gap = core_compression(v.H @ v - v @ v.H, core)
        low = float(np.linalg.eigvalsh((gap + gap.conj().T) / 2).min())
        report.add(f"rel/quasinormal/{x}", max(0.0, -low), POSITIVITY_TOL, min_eigenvalue=low)
    return report


# Wold basis and action oracle --------------------------------------------


def _vector(params, idx: Sequence[int]) -> np.ndarray:
    v = np.zeros(params.dim, dtype=complex)
    v[basis_index(params, idx)] = 1.0
    return v


def wold_basis(hat: Mapping[str, GradedOperator], w: Sequence[int]) -> tuple[np.ndarray, tuple[int, int]]:
    """``A^k B^m Y^j e_000`` for ``w = (j, k, m)``: the vector and its circle degree."""
    p = _params(hat)
    j, k, m = (int(x) for x in w)
    if min(j, k, m) < 0 or j + k + m > p.core_max:
        raise ParameterError(f"Wold index {tuple(w)} outside the core (j + k + m <= {p.core_max})")
    vec = {p.zero_degree: _vector(p, (0, 0, 0))}
    for label, times in (("Y", j), ("B", m), ("A", k)):
        for _ in range(times):
            vec = hat[label].apply(vec)
    nonzero = {deg: v for deg, v in vec.items() if np.any(v)}
    if len(nonzero) != 1:
        raise AssertionError(f"Wold vector for {tuple(w)} is not homogeneous")
    (deg, v), = nonzero.items()
    return v, deg


def wold_indices(core_max: int) -> list[tuple[int, int, int]]:
    return [w for w in product(range(core_max + 1), repeat=3) if sum(w) <= core_max]


def check_wold(hat: Mapping[str, GradedOperator]) -> VerificationReport:
    p = _params(hat)
    report = VerificationReport()
    worst = 0.0
    vectors = []
    for w in wold_indices(p.core_max):
        v, deg = wold_basis(hat, w)
        target = _vector(p, w)
        err = float(np.abs(v - target).max())
        worst = max(worst, err)
        report.flag(f"wold/degree/{_deg_str(w)}", deg == (w[1] + w[2], w[0]), degree=deg)
        vectors.append(v)
    report.add("wold/basis", worst, 0.0, count=len(vectors))
    G = np.array(vectors)
    gram = G.conj() @ G.T
    report.add("wold/orthonormal", float(np.abs(gram - np.identity(len(vectors))).max()), 0.0)
    return report


ORACLE_SYMBOLS = ("A", "A*", "B", "B*", "C", "C*", "X", "X*", "Y", "Y*", "Z", "Z*")
_PHASE = {x: (1, 0) for x in RED_LABELS} | {x: (0, 1) for x in BLUE_LABELS}


def action_oracle(symbol: str, w: Sequence[int]) -> tuple[tuple[int, int], tuple[int, int, int]] | None:
    """Closed-form action on the Wold vector ``(j, k, m)``: (circle degree, new index) or None for zero."""
    j, k, m = (int(x) for x in w)
    base = symbol[0]
    star = symbol.endswith("*")
    phase = _PHASE[base]
    if star:
        phase = (-phase[0], -phase[1])
    target: tuple[int, int, int] | None
    if symbol == "A":
        target = (j, k + 1, m)
    elif symbol == "A*":
        target = None if k == 0 else (j, k - 1, m)
    elif symbol == "B":
        target = None if k > 0 else (j, 0, m + 1)
    elif symbol == "B*":
        target = None if k > 0 or m == 0 else (j, 0, m - 1)
    elif base == "C":
        target = (j, 0, 0) if k == 0 and m == 0 else None
    elif symbol == "X":
        target = (j + 1, k, m + 1)
    elif symbol == "X*":
        target = None if m == 0 or j == 0 else (j - 1, k, m - 1)
    elif symbol == "Y":
        if m == 0:
            target = (j + 1, k, 0)
        elif j == 0:
            target = (0, k + 1, m - 1)
        else:
            target = None
    elif symbol == "Y*":
        if j >= 1 and m == 0:
            target = (j - 1, k, 0)
        elif j == 0 and k >= 1:
            target = (0, k - 1, m + 1)
        else:
            target = None
    elif base == "Z":
        target = (0, 0, m) if j == 0 and k == 0 else None
    else:
        raise ValueError(f"unknown symbol {symbol!r}")
    return None if target is None else (phase, target)


def oracle_operator(params, symbol: str) -> GradedOperator:
    """The operator defined by the oracle on the core basis, zero elsewhere."""
    import scipy.sparse as sp

    comps: dict[tuple, sp.lil_matrix] = {}
    for w in product(range(params.core_max + 1), repeat=3):
        out = action_oracle(symbol, w)
        if out is None:
            continue
        deg, t = out
        M = comps.setdefault(deg, sp.lil_matrix((params.dim, params.dim), dtype=complex))
        M[basis_index(params, t), basis_index(params, w)] = 1.0
    return GradedOperator(params, {deg: M.tocsr() for deg, M in comps.items()})


def check_action(hat: Mapping[str, GradedOperator]) -> VerificationReport:
    p = _params(hat)
    report = VerificationReport()
    for symbol in ORACLE_SYMBOLS:
        op = word_product(hat, symbol)
        worst = 0.0
        cases = 0
        for w in product(range(p.core_max + 1), repeat=3):
            got = op.apply({p.zero_degree: _vector(p, w)})
            expected = action_oracle(symbol, w)
            want = {} if expected is None else {expected[0]: _vector(p, expected[1])}
            for deg in set(got) | set(want):
                a = got.get(deg, np.zeros(p.dim))
                b = want.get(deg, np.zeros(p.dim))
                worst = max(worst, float(np.abs(a - b).max()))
            cases += 1
        report.add(f"oracle/{symbol}", worst, IDENTITY_TOL, cases=cases)
        report.add(f"oracle/conjugation/{symbol}", core_residual(oracle_operator(p, symbol), op), IDENTITY_TOL)
    return report


def verify_all(N: int = 10, d: int = 6, tol: float = CK_TOL, graph: KGraph | None = None) -> VerificationReport:
    """Every check of the limit operators and the derived Cuntz-Krieger family."""
    from . import su3

    hat = hat_ops(N, d)
    g = graph or su3.build()
    a = edge_operators(g, hat)
    identity_tol = min(tol, IDENTITY_TOL)
    report = VerificationReport()
    report.extend(check_hat_identities(hat, identity_tol))
    report.extend(check_incidence(g, hat))
    report.extend(check_relation_list(hat, identity_tol))
    report.extend(check_ck(a, tol=tol))
    report.extend(check_gauge(a))
    report.extend(check_wold(hat))
    report.extend(check_action(hat))
    return report.merged()
