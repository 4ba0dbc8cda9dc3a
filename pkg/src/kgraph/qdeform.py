"""Soibelman-type representations of the quantized coordinate ring of SU(3).

Generator tables are ``n x n`` arrays of :class:`GradedOperator`; the tensor
product of representations is the box product ``(A [x] B)(t_ij) = sum_k A(t_ik) (x) B(t_kj)``.

Two frames appear here.  The *representation frame* is whatever the box
products produce: ``Xi_q = (pi_1 [x] pi_2 [x] pi_1) [x] (tau_1 [x] tau_2)``.
The *hat frame* holds the six limit operators ``A..Z`` exactly as written down
for the graph algebra.  They differ by reversing the three Fock factors, by the
circle relabelling ``(a, b) -> (-b, -a)`` and by a sign on ``Y``;
:func:`to_representation_frame` carries hat operators across.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ParameterError
from .graded import (
    DEFAULT_DEPTH,
    DEFAULT_N,
    CoreSubspace,
    GradedOperator,
    TruncationParams,
    check_q,
    core_residual,
    elementary,
    op_norm_core,
    sqrt_positive,
)
from .report import VerificationReport


@dataclass(frozen=True)
class GeneratorTable:
    """Images ``T(t_ij)`` of the generator matrix under a representation."""

    entries: tuple[tuple[GradedOperator, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise DimensionError("generator table must be square")
        params = {(e.params.N, e.params.f, e.params.c) for row in self.entries for e in row}
        if len(params) != 1:
            raise DimensionError(f"table entries disagree on truncation parameters: {params}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[GradedOperator]]) -> "GeneratorTable":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def params(self) -> TruncationParams:
        return self.entries[0][0].params

    def __call__(self, i: int, j: int) -> GradedOperator:
        """Entry ``(i, j)`` with 1-based indices, as in ``t_ij``."""
        return self.entries[i - 1][j - 1]

    def map(self, fn: Callable[[GradedOperator], GradedOperator]) -> "GeneratorTable":
        return GeneratorTable(tuple(tuple(fn(e) for e in row) for row in self.entries))


def boxtimes(a: GeneratorTable, b: GeneratorTable) -> GeneratorTable:
    if a.n != b.n:
        raise DimensionError(f"cannot box {a.n}x{a.n} with {b.n}x{b.n}")
    n = a.n
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            acc = a(i, 1).kron(b(1, j))
            for k in range(2, n + 1):
                acc = acc + a(i, k).kron(b(k, j))
            row.append(acc)
        rows.append(row)
    return GeneratorTable.from_rows(rows)


def boxtimes_all(*tables: GeneratorTable) -> GeneratorTable:
    out = tables[0]
    for t in tables[1:]:
        out = boxtimes(out, t)
    return out


def _params(N: int, f: int, c: int, d: int) -> TruncationParams:
    return TruncationParams(N=N, f=f, c=c, d=d)


def trivial_table(n: int = 3, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GeneratorTable:
    """Counit-like table: scalar identity on the diagonal, zero elsewhere (f = c = 0)."""
    p = _params(N, 0, 0, d)
    one, zero = GradedOperator.identity(p), GradedOperator.zero(p)
    return GeneratorTable.from_rows([[one if i == j else zero for j in range(n)] for i in range(n)])


def su2_rep(q: float, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GeneratorTable:
    """``t_11 -> S* C_q``, ``t_12 -> q D_q``, ``t_21 -> -D_q``, ``t_22 -> C_q S``."""
    e = elementary(N, q)
    p = _params(N, 1, 0, d)
    h = lambda m: GradedOperator.homogeneous(p, m)  # noqa: E731
    return GeneratorTable.from_rows(
        [
            [h(e.Sstar @ e.C), h(q * e.D)],
            [h(-e.D), h(e.C @ e.S)],
        ]
    )


def _embed(small: GeneratorTable, i: int) -> GeneratorTable:
    """Place a 2x2 table on rows/columns ``i, i+1`` of a 3x3 table, identity elsewhere."""
    if i not in (1, 2):
        raise ParameterError(f"embedding index must be 1 or 2, got {i}")
    p = small.params
    one, zero = GradedOperator.identity(p), GradedOperator.zero(p)
    rows = []
    for j in range(1, 4):
        row = []
        for k in range(1, 4):
            if j in (i, i + 1) and k in (i, i + 1):
                row.append(small(j - i + 1, k - i + 1))
            else:
                row.append(one if j == k else zero)
        rows.append(row)
    return GeneratorTable.from_rows(rows)


def pi_i(i: int, q: float, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GeneratorTable:
    return _embed(su2_rep(q, N, d), i)


def tau_i(i: int, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GeneratorTable:
    """Diagonal circle-valued table: ``tau_1 = diag(z, zbar, 1)``, ``tau_2 = diag(1, z, zbar)``."""
    if i not in (1, 2):
        raise ParameterError(f"tau index must be 1 or 2, got {i}")
    p = _params(N, 0, 1, d)
    one = np.ones((1, 1))
    z = GradedOperator.homogeneous(p, one, (1,))
    zbar = GradedOperator.homogeneous(p, one, (-1,))
    unit = GradedOperator.identity(p)
    zero = GradedOperator.zero(p)
    diag = [z, zbar, unit] if i == 1 else [unit, z, zbar]
    return GeneratorTable.from_rows([[diag[a] if a == b else zero for b in range(3)] for a in range(3)])


def xi(q: float, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GeneratorTable:
    """``(pi_1 [x] pi_2 [x] pi_1) [x] (tau_1 [x] tau_2)`` on three Fock and two circle factors."""
    fock = boxtimes_all(pi_i(1, q, N, d), pi_i(2, q, N, d), pi_i(1, q, N, d))
    torus = boxtimes(tau_i(1, N, d), tau_i(2, N, d))
    return boxtimes(fock, torus)


# generators and their limits --------------------------------------------

OMEGA1_LABELS = {1: "X", 2: "Y", 3: "Z"}
OMEGA2_LABELS = {1: "A", 2: "B", 3: "C"}

# Sign relating the q -> 0 limit of the adjoint generator to its hat operator.
LIMIT_PHASES = {"A": 1, "B": 1, "C": 1, "X": 1, "Y": -1, "Z": 1}

# hat-frame degree = HAT_REGRADING @ representation-frame degree (an involution)
HAT_REGRADING = ((0, -1), (-1, 0))
FOCK_REVERSAL = (2, 1, 0)


def generator_label(i: int, j: int) -> str:
    if i == 1 and j in OMEGA1_LABELS:
        return OMEGA1_LABELS[j]
    if i == 2 and j in OMEGA2_LABELS:
        return OMEGA2_LABELS[j]
    raise ParameterError(f"no generator C_{j}^(omega_{i})")


def omega2_exponent(j: int) -> int:
    """Power of ``q`` multiplying ``t_{(4-j)3}^*`` in the second fundamental family."""
    return 1 - j


def c_gen(
    q: float,
    N: int = DEFAULT_N,
    i: int = 1,
    j: int = 1,
    d: int = DEFAULT_DEPTH,
    table: GeneratorTable | None = None,
) -> GradedOperator:
    """Image of ``C_j^{omega_i}``: ``t_j1`` for ``i = 1``; ``q^(1-j) t_{(4-j)3}^*`` for ``i = 2``."""
    generator_label(i, j)
    q = check_q(q)
    x = table if table is not None else xi(q, N, d)
    if i == 1:
        return x(j, 1)
    k = omega2_exponent(j)
    if q == 0.0 and k < 0:
        raise ParameterError(
            f"C_{j}^(omega_2) carries q^{k}, singular at q = 0; use hat_ops for the limit"
        )
    return x(4 - j, 3).adjoint().scale(q**k)


def hat_ops(N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> dict[str, GradedOperator]:
    """The six q -> 0 limit operators on three Fock factors and two circles."""
    e = elementary(N, 0.0)
    p = _params(N, 3, 2, d)
    S, Ss, P, I = e.S, e.Sstar, e.P, e.I
    red, blue = (1, 0), (0, 1)
    t = GradedOperator.term
    return {
        "A": t(p, [I, S, I], red),
        "B": t(p, [I, P, S], red),
        "C": t(p, [I, P, P], red),
        "X": t(p, [S, I, S], blue),
        "Y": t(p, [S, I, P], blue) + t(p, [P, S, Ss], blue),
        "Z": t(p, [P, P, I], blue),
    }


def to_representation_frame(hat: GradedOperator, label: str | None = None) -> GradedOperator:
    """Carry a hat-frame operator into the frame of ``Xi_q``."""
    out = hat.permute_factors(FOCK_REVERSAL).regrade(HAT_REGRADING)
    if label is not None:
        out = out.scale(LIMIT_PHASES[label])
    return out


def limit_target(i: int, j: int, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> GradedOperator:
    """The q -> 0 limit of ``Xi_q(C_j^{omega_i})^*`` in the representation frame."""
    label = generator_label(i, j)
    return to_representation_frame(hat_ops(N, d)[label], label)


# relations --------------------------------------------------------------


def permutation_length(sigma: Sequence[int]) -> int:
    return sum(1 for a in range(len(sigma)) for b in range(a + 1, len(sigma)) if sigma[a] > sigma[b])


def det_q_terms(n: int, q: float) -> list[tuple[float, tuple[int, ...]]]:
    """``(weight, sigma)`` pairs with weight ``(-q)^{length(sigma)}``; sigma is 1-based."""
    out = []
    for sigma in permutations(range(1, n + 1)):
        out.append(((-q) ** permutation_length(sigma), tuple(sigma)))
    return out


def det_q(table: GeneratorTable, q: float) -> GradedOperator:
    n = table.n
    acc = GradedOperator.zero(table.params)
    for weight, sigma in det_q_terms(n, q):
        prod = table(1, sigma[0])
        for r in range(2, n + 1):
            prod = prod @ table(r, sigma[r - 1])
        acc = acc + prod.scale(weight)
    return acc


def relation_instances(n: int, q: float) -> list[tuple[str, tuple[int, int, int, int], Callable]]:
    """Every instance of the three quadratic relation families on indices ``(i, j, k, l)``."""
    out = []
    rng = range(1, n + 1)
    for i in rng:
        for j in rng:
            for k in rng:
                for l in rng:
                    if (i == k and j < l) or (i < k and j == l):
                        out.append(("q-commute", (i, j, k, l), lambda t, a, b, c, e: t(a, b) @ t(c, e) - (t(c, e) @ t(a, b)).scale(q)))
                    elif i < k and j > l:
                        out.append(("commute", (i, j, k, l), lambda t, a, b, c, e: t(a, b) @ t(c, e) - t(c, e) @ t(a, b)))
                    elif i < k and j < l:
                        out.append(
                            (
                                "cross",
                                (i, j, k, l),
                                lambda t, a, b, c, e: t(a, b) @ t(c, e) - t(c, e) @ t(a, b) - (t(a, e) @ t(c, b)).scale(q - 1.0 / q),
                            )
                        )
    return out


def frt_residuals(
    q: float,
    N: int = DEFAULT_N,
    d: int = DEFAULT_DEPTH,
    tol: float = 1e-10,
    table: GeneratorTable | None = None,
) -> VerificationReport:
    q = check_q(q, allow_zero=False)
    t = table if table is not None else xi(q, N, d)
    core = CoreSubspace(t.params)
    report = VerificationReport()
    for family, (i, j, k, l), rel in relation_instances(t.n, q):
        r = core_residual(rel(t, i, j, k, l), None, core)
        report.add(f"frt/{family}/{i}{j}{k}{l}", r, tol, q=q, N=t.params.N)
    det = det_q(t, q)
    report.add("frt/det_q", core_residual(det, GradedOperator.identity(t.params), core), tol, q=q, N=t.params.N)
    return report


# q -> 0 limit rates -------------------------------------------------------


@dataclass(frozen=True)
class LimitFit:
    i: int
    j: int
    label: str
    qs: tuple[float, ...]
    residuals: tuple[float, ...]
    slope: float
    intercept: float
    excluded: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        """Residual strictly decreases as q decreases along the grid."""
        pairs = sorted(zip(self.qs, self.residuals), reverse=True)
        return all(b[1] < a[1] for a, b in zip(pairs, pairs[1:]))


DEFAULT_Q_GRID = tuple(2.0**-k for k in range(3, 8))
DEGENERATE_RESIDUAL = 1e-13


def limit_residual(i: int, j: int, q: float, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> float:
    """``||c_gen(q)^* - limit||`` on the core."""
    gen = c_gen(q, N, i, j, d).adjoint()
    return op_norm_core(gen - limit_target(i, j, N, d))


def fit_loglog(qs: Sequence[float], rs: Sequence[float]) -> tuple[float, float]:
    x = np.log(np.asarray(qs, dtype=float))
    y = np.log(np.asarray(rs, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def limit_rate(
    i: int,
    j: int,
    q_list: Sequence[float] = DEFAULT_Q_GRID,
    N: int = DEFAULT_N,
    d: int = DEFAULT_DEPTH,
    residual_fn: Callable[[int, int, float], float] | None = None,
) -> LimitFit:
    label = generator_label(i, j)
    qs = [float(q) for q in q_list]
    for q in qs:
        if not 0.0 < q <= 0.6:
            raise ParameterError(f"limit grid values must lie in (0, 0.6], got {q}")
        if i == 2 and omega2_exponent(j) < 0 and q < 2.0**-8:
            raise ParameterError(f"q = {q} below 2^-8 amplifies rounding through q^{omega2_exponent(j)}")
    fn = residual_fn or (lambda a, b, q: limit_residual(a, b, q, N, d))
    rs = [fn(i, j, q) for q in qs]
    keep = [(q, r) for q, r in zip(qs, rs) if r >= DEGENERATE_RESIDUAL]
    excluded = tuple(q for q, r in zip(qs, rs) if r < DEGENERATE_RESIDUAL)
    if len(keep) >= 2:
        slope, intercept = fit_loglog([k[0] for k in keep], [k[1] for k in keep])
    else:
        slope, intercept = math.nan, math.nan
    return LimitFit(i, j, label, tuple(qs), tuple(rs), slope, intercept, excluded)


# the q-independent quotient representation --------------------------------

# Circle convention of the printed quotient images: every circle variable conjugated.
PRINTED_REGRADING = ((-1, 0, 0), (0, -1, 0), (0, 0, -1))


def lambda_rep(q: float, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> tuple[GeneratorTable, GeneratorTable]:
    """The two summands ``pi_1 [x] pi_2 [x] tau_1`` and ``tau_1 [x] pi_2 [x] pi_1``, each boxed with ``tau_1 [x] tau_2``.

    Each summand has two Fock factors and three circles; the circle order is
    (in-summand circle, first torus circle, second torus circle).
    """
    q = check_q(q)
    torus = boxtimes(tau_i(1, N, d), tau_i(2, N, d))
    p1, p2, t1 = pi_i(1, q, N, d), pi_i(2, q, N, d), tau_i(1, N, d)
    first = boxtimes(boxtimes_all(p1, p2, t1), torus)
    second = boxtimes(boxtimes_all(t1, p2, p1), torus)
    # the box product put the in-summand circle first in both cases already,
    # since Fock factors are stored before circles
    return first, second


def lambda_generator(q: float, i: int, j: int, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH, tables=None) -> tuple[GradedOperator, GradedOperator]:
    """Printed-convention images of ``C_j^{omega_i}`` adjoint under the two summands.

    At ``q = 0`` the second family is taken from its closed form, never by
    substituting into the scaled expression.
    """
    generator_label(i, j)
    q = check_q(q)
    if q == 0.0 and i == 2:
        return lambda_zero_omega2(j, N, d)
    first, second = tables if tables is not None else lambda_rep(q, N, d)
    out = []
    for tab in (first, second):
        if i == 1:
            g = tab(j, 1).adjoint()
        else:
            g = tab(4 - j, 3).scale(q ** omega2_exponent(j))
        out.append(g.regrade(PRINTED_REGRADING))
    return out[0], out[1]


def lambda_zero_omega2(j: int, N: int = DEFAULT_N, d: int = DEFAULT_DEPTH) -> tuple[GradedOperator, GradedOperator]:
    """Closed-form q = 0 images of the second family (printed convention)."""
    e = elementary(N, 0.0)
    p = _params(N, 2, 3, d)
    t = GradedOperator.term
    zero = GradedOperator.zero(p)
    if j == 1:
        return t(p, [e.I, e.S], (0, 0, 1)), t(p, [e.S, e.I], (0, 0, 1))
    if j == 2:
        return t(p, [e.S, e.P], (0, 0, 1)), t(p, [e.P, e.I], (1, 0, 1))
    if j == 3:
        return t(p, [e.P, e.P], (0, 0, 1)), zero
    raise ParameterError(f"no generator C_{j}^(omega_2)")


# series reconstruction ----------------------------------------------------


def _series_pair(q: float, formula_id: int, max_weight: int, N: int, d: int) -> tuple[GradedOperator, GradedOperator]:
    """Truncated series for summands (first, second), keeping terms of q-weight <= max_weight."""
    g0 = {j: lambda_generator(0.0, 1, j, N, d) for j in (1, 2, 3)}
    out = []
    for s in (0, 1):
        a1, a2, a3 = g0[1][s], g0[2][s], g0[3][s]
        out.append(_series_one(q, formula_id, max_weight, a1, a2, a3))
    return out[0], out[1]


def _series_one(q: float, formula_id: int, max_weight: int, a1: GradedOperator, a2: GradedOperator, a3: GradedOperator) -> GradedOperator:
    p = a1.params
    if formula_id == 1:
        inner = GradedOperator.zero(p)
        for k in range(max_weight // 2 + 1):
            inner = inner + (a1**k @ a1.adjoint() ** k).scale((1 - q * q) * q ** (2 * k))
        return a1 @ sqrt_positive(inner)
    if formula_id == 2:
        inner = GradedOperator.zero(p)
        for j in range(1, max_weight // 2 + 2):
            inner = inner + (a2**j @ a2.adjoint() ** j).scale((1 - q * q) * q ** (2 * (j - 1)))
        middle = sqrt_positive(inner) @ a2
        acc = GradedOperator.zero(p)
        for k in range(max_weight + 1):
            acc = acc + (a1**k @ middle @ a1.adjoint() ** k).scale(q**k)
        return acc
    if formula_id == 3:
        acc = GradedOperator.zero(p)
        for k in range(max_weight + 1):
            for j in range(max_weight + 1 - k):
                left = a1**k @ a2**j
                acc = acc + (left @ a3 @ left.adjoint()).scale(q ** (k + j))
        return acc
    raise ParameterError(f"series formula must be 1, 2 or 3, got {formula_id}")


def series_value(q: float, formula_id: int, max_weight: int, N: int, d: int) -> tuple[GradedOperator, GradedOperator]:
    return _series_pair(q, formula_id, max_weight, N, d)


SERIES_N = 40
SERIES_DEPTH = 16


def series_check(formula_id: int, q: float, K: int, N: int = SERIES_N, d: int = SERIES_DEPTH) -> list[float]:
    """Core error of the level-``1..K`` truncations against ``lambda_rep(q)``.

    Level ``L`` keeps every series term whose power of ``q`` is below ``2L``,
    so each level gains one factor ``q^2``.
    """
    q = check_q(q, allow_zero=False)
    if K < 1:
        raise ParameterError("K must be at least 1")
    tables = lambda_rep(q, N, d)
    target = lambda_generator(q, 1, formula_id, N, d, tables)
    core = CoreSubspace(target[0].params)
    errors = []
    for level in range(1, K + 1):
        approx = _series_pair(q, formula_id, 2 * level - 1, N, d)
        err = max(core_residual(a, t, core) for a, t in zip(approx, target))
        errors.append(err)
    return errors
