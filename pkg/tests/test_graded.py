from __future__ import annotations

import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from kgraph.errors import DimensionError, ParameterError
from kgraph.graded import (
    CoreSubspace,
    GradedOperator,
    TruncationParams,
    beta_action,
    core_residual,
    elementary,
    full_residual,
    graded_basis_vector,
    op_norm_core,
    sqrt_positive,
)

N = 8


def small(f=2, c=2, d=3):
    return TruncationParams(N=N, f=f, c=c, d=d)


def rand_op(seed: int, p: TruncationParams, degrees=((0, 0), (1, 0), (0, -1))) -> GradedOperator:
    rng = np.random.default_rng(seed)
    comps = {}
    for deg in degrees:
        m = sp.random(p.dim, p.dim, density=0.05, random_state=rng, format="csr")
        comps[deg] = m + 1j * sp.random(p.dim, p.dim, density=0.05, random_state=rng, format="csr")
    return GradedOperator(p, comps)


def unit(theta: float) -> complex:
    return complex(math.cos(theta), math.sin(theta))


# truncation parameters


def test_params_require_reserve():
    with pytest.raises(ParameterError):
        TruncationParams(N=4, d=6)
    p = TruncationParams(N=10, d=6)
    assert (p.dim, p.core_max, p.zero_degree) == (1000, 3, (0, 0))
    assert len(CoreSubspace(p)) == 64


# elementary operators


def test_elementary_at_zero():
    e = elementary(N, 0.0)
    assert (e.D != e.P).nnz == 0
    assert (e.C != e.Q).nnz == 0


def test_elementary_entries():
    e = elementary(N, 0.5)
    assert e.C[1, 1] == pytest.approx(math.sqrt(0.75), abs=1e-15)
    assert e.D[3, 3] == pytest.approx(0.125)
    assert e.S[1, 0] == 1 and e.S[0, N - 1] == 0


@pytest.mark.parametrize("q", [0.0, 0.3, 0.5, 0.9])
def test_elementary_identities(q):
    e = elementary(N, q)
    assert abs(e.P + e.Q - e.I).max() == 0
    assert abs(e.C @ e.C + e.D @ e.D - e.I).max() <= 1e-15
    assert (e.P @ e.S).nnz == 0
    assert abs(e.Q @ e.S - e.S).max() == 0


@pytest.mark.parametrize("q", [-0.1, 1.0, 2.0])
def test_elementary_rejects_q(q):
    with pytest.raises(ParameterError):
        elementary(N, q)


def test_shift_isometric_only_on_core():
    p = TruncationParams(N=N, f=1, c=0, d=2)
    e = elementary(N, 0.0)
    S = GradedOperator.homogeneous(p, e.S)
    I = GradedOperator.identity(p)
    assert core_residual(S.H @ S, I) == 0.0
    assert full_residual(S.H @ S, I) == 1.0


# arithmetic


def test_adjoint_is_involution():
    T = rand_op(1, small())
    assert (T.H.H - T).is_zero


def test_product_adds_degrees():
    p = small()
    e = elementary(N, 0.0)
    a = GradedOperator.term(p, [e.S, e.I], (1, 0))
    b = GradedOperator.term(p, [e.I, e.S], (0, 1))
    assert (a @ b).degrees == [(1, 1)]
    assert a.H.degree == (-1, 0)


def test_addition_merges_and_prunes():
    p = small()
    T = rand_op(2, p)
    assert (T - T).is_zero
    assert (T + T).equals(T.scale(2.0))
    assert (2 * T).equals(T * 2)


def test_mismatched_params():
    with pytest.raises(DimensionError):
        _ = rand_op(0, small()) + rand_op(0, small(f=1))
    with pytest.raises(DimensionError):
        GradedOperator(small(), {(0,): sp.identity(small().dim)})


def test_kron_concatenates():
    p1 = TruncationParams(N=N, f=1, c=1, d=3)
    e = elementary(N, 0.0)
    a = GradedOperator.homogeneous(p1, e.S, (1,))
    b = GradedOperator.homogeneous(p1, e.P, (-1,))
    ab = a.kron(b)
    assert (ab.params.f, ab.params.c, ab.degrees) == (2, 2, [(1, -1)])
    assert abs(ab.component((1, -1)) - sp.kron(e.S, e.P)).max() == 0


def test_powers_and_regrade():
    p = small()
    e = elementary(N, 0.0)
    a = GradedOperator.term(p, [e.S, e.I], (1, 0))
    assert (a**3).degree == (3, 0)
    assert a.regrade(((0, -1), (-1, 0))).degree == (0, -1)
    with pytest.raises(ParameterError):
        a ** -1


def test_permute_factors():
    p = TruncationParams(N=N, f=3, c=0, d=3)
    e = elementary(N, 0.0)
    T = GradedOperator.term(p, [e.S, e.P, e.I])
    assert T.permute_factors((2, 1, 0)).equals(GradedOperator.term(p, [e.I, e.P, e.S]))


def test_evaluate_circle():
    p = small()
    T = rand_op(3, p, degrees=((1, 0), (1, 2)))
    U = T.evaluate_circle(1, -1.0)
    assert U.params.c == 1 and U.degrees == [(1,)]
    assert U.equals(GradedOperator(U.params, {(1,): T.component((1, 0)) + T.component((1, 2))}))


def test_apply_and_json():
    p = small()
    e = elementary(N, 0.0)
    T = GradedOperator.term(p, [e.S, e.I], (1, 0))
    out = T.apply(graded_basis_vector(p, (0, 2)))
    assert list(out) == [(1, 0)]
    assert out[(1, 0)][N * 1 + 2] == 1
    blob = json.loads(T.to_json())
    assert blob["components"][0]["degree"] == [1, 0]


# gauge action


def test_beta_trivial_and_single_component():
    p = small()
    T = rand_op(4, p)
    assert beta_action(T, (1, 1)).equals(T)
    H = GradedOperator.homogeneous(p, sp.identity(p.dim), (1, 0))
    assert beta_action(H, (1j, 1)).equals(H.scale(1j))
    with pytest.raises(ParameterError):
        beta_action(T, (2, 1))


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.integers(0, 50))
def test_beta_is_a_group_action(a, b, c, d, seed):
    p = small()
    T = rand_op(seed, p)
    t, s = (unit(a), unit(b)), (unit(c), unit(d))
    ts = (t[0] * s[0], t[1] * s[1])
    assert beta_action(T, ts).equals(beta_action(beta_action(T, s), t), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.integers(0, 50))
def test_beta_is_multiplicative(a, b, seed):
    p = small()
    S, T = rand_op(seed, p), rand_op(seed + 1, p)
    t = (unit(a), unit(b))
    assert beta_action(S @ T, t).equals(beta_action(S, t) @ beta_action(T, t), atol=1e-12)


# residuals and norms


def test_core_residual_self_is_zero():
    T = rand_op(5, small())
    assert core_residual(T, T) == 0.0


def test_core_residual_quadrature():
    p = small()
    P0 = sp.csr_matrix(([3.0], ([0], [0])), shape=(p.dim, p.dim))
    P1 = sp.csr_matrix(([4.0], ([1], [0])), shape=(p.dim, p.dim))
    T = GradedOperator(p, {(0, 0): P0, (1, 0): P1})
    assert core_residual(T) == pytest.approx(5.0)


def test_norms():
    p = TruncationParams(N=N, f=1, c=0, d=3)
    e = elementary(N, 0.5)
    assert op_norm_core(GradedOperator.zero(p)) == 0.0
    assert op_norm_core(GradedOperator.homogeneous(p, e.S)) == pytest.approx(1.0, abs=1e-10)
    assert op_norm_core(GradedOperator.homogeneous(p, e.D)) == pytest.approx(1.0, abs=1e-10)


def test_norm_matches_svd():
    p = small()
    T = rand_op(6, p)
    cols = CoreSubspace(p).indices
    stacked = np.vstack([m[:, cols].toarray() for m in T.components.values()])
    assert op_norm_core(T) == pytest.approx(np.linalg.svd(stacked, compute_uv=False)[0], rel=1e-8)


def test_sqrt_positive():
    p = small(f=1, c=0)
    e = elementary(N, 0.5)
    D2 = GradedOperator.homogeneous(p, e.D @ e.D)
    assert sqrt_positive(D2).equals(GradedOperator.homogeneous(p, e.D), atol=1e-15)
    M = np.array(np.diag(np.arange(1.0, N + 1)))
    M[0, 1] = M[1, 0] = 0.5
    R = sqrt_positive(GradedOperator.homogeneous(p, M))
    assert (R @ R).equals(GradedOperator.homogeneous(p, M), atol=1e-12)
