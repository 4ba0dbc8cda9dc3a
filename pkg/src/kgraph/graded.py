"""Graded sparse operators on truncated tensor-Fock spaces.

An element of ``Toeplitz^{(x)f} (x) C(T)^{(x)c}`` that is a finite sum of
homogeneous terms is stored as a map ``degree -> sparse matrix``: the matrix
acts on ``(C^N)^{(x)f}`` (each ``l^2(N)`` factor cut to its first ``N`` basis
vectors) and the degree ``m in Z^c`` records the monomial ``z_1^{m_1}...z_c^{m_c}``
of the circle factors.  Gauge actions become exact phase multiplications.

The truncated shift is nilpotent (``S e_{N-1} = 0``), so identities of the
untruncated algebra only survive on the *core*: basis vectors whose indices all
lie at or below ``N - 1 - d``.  Any word of length ``<= d`` in operators moving
each index by at most one never reaches the cut from there.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, NumericalWarning, ParameterError

Degree = tuple[int, ...]

DEFAULT_N = 10
DEFAULT_DEPTH = 6
DEFAULT_TOL = 1e-10
DENSE_GRAM_LIMIT = 1500
GRAM_SQUARINGS = 10


@dataclass(frozen=True)
class TruncationParams:
    """Truncation dimension ``N``, Fock factor count ``f``, circle count ``c``, reserve depth ``d``."""

    N: int = DEFAULT_N
    f: int = 3
    c: int = 2
    d: int = DEFAULT_DEPTH

    def __post_init__(self) -> None:
        if self.f < 0 or self.c < 0:
            raise ParameterError(f"factor counts must be non-negative, got f={self.f}, c={self.c}")
        if self.d < 0:
            raise ParameterError(f"reserve depth must be non-negative, got d={self.d}")
        if self.N < self.d + 2:
            raise ParameterError(f"need N >= d + 2, got N={self.N}, d={self.d}")

    @property
    def dim(self) -> int:
        return self.N**self.f

    @property
    def core_max(self) -> int:
        return self.N - 1 - self.d

    @property
    def zero_degree(self) -> Degree:
        return (0,) * self.c

    def with_factors(self, f: int, c: int) -> "TruncationParams":
        return TruncationParams(self.N, f, c, self.d)


@dataclass(frozen=True)
class CoreSubspace:
    """Tensor basis vectors ``e_{i_1} (x) ... (x) e_{i_f}`` with every ``i_j <= N - 1 - d``."""

    params: TruncationParams

    @cached_property
    def indices(self) -> np.ndarray:
        p = self.params
        per_factor = np.arange(p.core_max + 1)
        if p.f == 0:
            return np.zeros(1, dtype=np.int64)
        grids = np.meshgrid(*([per_factor] * p.f), indexing="ij")
        return np.ravel_multi_index([g.ravel() for g in grids], (p.N,) * p.f).astype(np.int64)

    def multi_indices(self) -> list[tuple[int, ...]]:
        p = self.params
        return [tuple(int(i) for i in np.unravel_index(k, (p.N,) * p.f)) for k in self.indices] if p.f else [()]

    def __len__(self) -> int:
        return len(self.indices)


def basis_index(params: TruncationParams, idx: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(idx), (params.N,) * params.f)) if params.f else 0


def _as_csr(m) -> sp.csr_matrix:
    out = sp.csr_matrix(m, dtype=np.complex128)
    out.eliminate_zeros()
    return out


def _add_degree(a: Degree, b: Degree) -> Degree:
    return tuple(x + y for x, y in zip(a, b))


class GradedOperator:
    """Finite sum of homogeneous components; immutable once built."""

    __slots__ = ("params", "_components")

    def __init__(self, params: TruncationParams, components: Mapping[Degree, object] | None = None) -> None:
        self.params = params
        comps: dict[Degree, sp.csr_matrix] = {}
        dim = params.dim
        for deg, mat in (components or {}).items():
            deg = tuple(int(x) for x in deg)
            if len(deg) != params.c:
                raise DimensionError(f"degree {deg} has length {len(deg)}, expected {params.c}")
            m = _as_csr(mat)
            if m.shape != (dim, dim):
                raise DimensionError(f"component shape {m.shape} does not match {(dim, dim)}")
            if m.nnz:
                comps[deg] = m
        self._components = dict(sorted(comps.items()))

    # construction -------------------------------------------------------

    @classmethod
    def zero(cls, params: TruncationParams) -> "GradedOperator":
        return cls(params, {})

    @classmethod
    def identity(cls, params: TruncationParams) -> "GradedOperator":
        return cls(params, {params.zero_degree: sp.identity(params.dim, format="csr")})

    @classmethod
    def homogeneous(cls, params: TruncationParams, matrix, degree: Degree | None = None) -> "GradedOperator":
        return cls(params, {params.zero_degree if degree is None else tuple(degree): matrix})

    @classmethod
    def term(
        cls,
        params: TruncationParams,
        factors: Sequence[object],
        degree: Degree | None = None,
        coeff: complex = 1.0,
    ) -> "GradedOperator":
        """Elementary tensor ``coeff * F_1 (x) ... (x) F_f`` times a circle monomial."""
        if len(factors) != params.f:
            raise DimensionError(f"{len(factors)} Fock factors given, expected {params.f}")
        return cls.homogeneous(params, coeff * tensor(factors), degree)

    # inspection ---------------------------------------------------------

    @property
    def components(self) -> Mapping[Degree, sp.csr_matrix]:
        return dict(self._components)

    @property
    def degrees(self) -> list[Degree]:
        return list(self._components)

    def component(self, degree: Degree) -> sp.csr_matrix:
        m = self._components.get(tuple(degree))
        return m if m is not None else sp.csr_matrix((self.params.dim, self.params.dim), dtype=np.complex128)

    @property
    def is_zero(self) -> bool:
        return not self._components

    @property
    def is_homogeneous(self) -> bool:
        return len(self._components) <= 1

    @property
    def degree(self) -> Degree | None:
        """Degree of a homogeneous nonzero operator, else ``None``."""
        if len(self._components) == 1:
            return next(iter(self._components))
        return None

    @property
    def nnz(self) -> int:
        return sum(m.nnz for m in self._components.values())

    def __repr__(self) -> str:
        return f"GradedOperator(N={self.params.N}, f={self.params.f}, c={self.params.c}, degrees={self.degrees}, nnz={self.nnz})"

    # arithmetic ---------------------------------------------------------

    def _check(self, other: "GradedOperator") -> None:
        p, o = self.params, other.params
        if (p.N, p.f, p.c) != (o.N, o.f, o.c):
            raise DimensionError(f"incompatible operators: (N,f,c)={(p.N, p.f, p.c)} vs {(o.N, o.f, o.c)}")

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        if not isinstance(other, GradedOperator):
            return NotImplemented
        self._check(other)
        comps = dict(self._components)
        for deg, m in other._components.items():
            comps[deg] = comps[deg] + m if deg in comps else m
        return GradedOperator(self.params, comps)

    def __neg__(self) -> "GradedOperator":
        return self.scale(-1.0)

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        if not isinstance(other, GradedOperator):
            return NotImplemented
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "GradedOperator":
        if c == 0:
            return GradedOperator.zero(self.params)
        return GradedOperator(self.params, {d: c * m for d, m in self._components.items()})

    def __mul__(self, c) -> "GradedOperator":
        if isinstance(c, GradedOperator):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        if not isinstance(other, GradedOperator):
            return NotImplemented
        self._check(other)
        comps: dict[Degree, sp.csr_matrix] = {}
        for da, ma in self._components.items():
            for db, mb in other._components.items():
                deg = _add_degree(da, db)
                prod = ma @ mb
                comps[deg] = comps[deg] + prod if deg in comps else prod
        return GradedOperator(self.params, comps)

    def __pow__(self, k: int) -> "GradedOperator":
        if k < 0:
            raise ParameterError("negative powers are not defined")
        out = GradedOperator.identity(self.params)
        for _ in range(k):
            out = out @ self
        return out

    def adjoint(self) -> "GradedOperator":
        return GradedOperator(self.params, {tuple(-x for x in d): m.conj().T for d, m in self._components.items()})

    @property
    def H(self) -> "GradedOperator":
        return self.adjoint()

    def kron(self, other: "GradedOperator") -> "GradedOperator":
        """Tensor product: Fock factors of ``self`` first, circle degrees concatenated."""
        if self.params.N != other.params.N or self.params.d != other.params.d:
            raise DimensionError("kron requires equal N and d")
        p = self.params.with_factors(self.params.f + other.params.f, self.params.c + other.params.c)
        comps: dict[Degree, sp.csr_matrix] = {}
        for da, ma in self._components.items():
            for db, mb in other._components.items():
                comps[da + db] = sp.kron(ma, mb, format="csr")
        return GradedOperator(p, comps)

    # structure maps -----------------------------------------------------

    def beta(self, t: Sequence[complex]) -> "GradedOperator":
        """Gauge action: multiply the degree-``m`` component by ``t^m``."""
        return beta_action(self, t)

    def regrade(self, matrix: Sequence[Sequence[int]]) -> "GradedOperator":
        """Relabel degrees by an integer matrix ``m -> M m`` (a map of circle groups)."""
        M = np.asarray(matrix, dtype=int)
        if M.shape[1] != self.params.c:
            raise DimensionError(f"regrading matrix needs {self.params.c} columns")
        p = self.params.with_factors(self.params.f, M.shape[0])
        comps: dict[Degree, sp.csr_matrix] = {}
        for d, m in self._components.items():
            nd = tuple(int(x) for x in M @ np.asarray(d, dtype=int))
            comps[nd] = comps[nd] + m if nd in comps else m
        return GradedOperator(p, comps)

    def permute_factors(self, perm: Sequence[int]) -> "GradedOperator":
        """Reorder Fock factors: new factor ``i`` is old factor ``perm[i]``."""
        p = self.params
        if sorted(perm) != list(range(p.f)):
            raise DimensionError(f"{perm} is not a permutation of {p.f} factors")
        shape = (p.N,) * p.f
        old = np.arange(p.dim)
        digits = np.unravel_index(old, shape)
        new_of_old = np.ravel_multi_index([digits[i] for i in perm], shape)
        U = sp.csr_matrix((np.ones(p.dim), (new_of_old, old)), shape=(p.dim, p.dim))
        return GradedOperator(p, {d: U @ m @ U.T for d, m in self._components.items()})

    def evaluate_circle(self, axis: int, value: complex = 1.0) -> "GradedOperator":
        """Evaluate circle factor ``axis`` at the point ``value`` of the circle."""
        p = self.params.with_factors(self.params.f, self.params.c - 1)
        comps: dict[Degree, sp.csr_matrix] = {}
        for d, m in self._components.items():
            nd = d[:axis] + d[axis + 1 :]
            term = (value ** d[axis]) * m
            comps[nd] = comps[nd] + term if nd in comps else term
        return GradedOperator(p, comps)

    def apply(self, vector: Mapping[Degree, np.ndarray]) -> dict[Degree, np.ndarray]:
        """Act on a graded vector ``{degree: coefficients}``."""
        out: dict[Degree, np.ndarray] = {}
        for dv, v in vector.items():
            for dm, m in self._components.items():
                deg = _add_degree(dm, dv)
                w = m @ v
                out[deg] = out[deg] + w if deg in out else w
        return {d: v for d, v in sorted(out.items()) if np.any(v != 0)}

    def equals(self, other: "GradedOperator", atol: float = 0.0) -> bool:
        self._check(other)
        degs = set(self._components) | set(other._components)
        for d in degs:
            diff = self.component(d) - other.component(d)
            if diff.nnz and np.max(np.abs(diff.data)) > atol:
                return False
        return True

    def sparsity_equal(self, other: "GradedOperator") -> bool:
        """Same degrees, same stored positions, same values."""
        if self.degrees != other.degrees:
            return False
        for d in self.degrees:
            a, b = self._components[d].tocoo(), other._components[d].tocoo()
            if set(zip(a.row, a.col)) != set(zip(b.row, b.col)):
                return False
        return self.equals(other)

    def to_json(self) -> str:
        comps = []
        for d, m in self._components.items():
            coo = m.tocoo()
            trip = [[int(i), int(j), float(v.real), float(v.imag)] for i, j, v in zip(coo.row, coo.col, coo.data)]
            comps.append({"degree": list(d), "triplets": trip})
        p = self.params
        return json.dumps({"N": p.N, "f": p.f, "c": p.c, "d": p.d, "components": comps})


def tensor(factors: Iterable[object]) -> sp.csr_matrix:
    out = sp.csr_matrix(np.ones((1, 1), dtype=np.complex128))
    for f in factors:
        out = sp.kron(out, f, format="csr")
    return out


def kron(*ops: GradedOperator) -> GradedOperator:
    out = ops[0]
    for op in ops[1:]:
        out = out.kron(op)
    return out


def beta_action(T: GradedOperator, t: Sequence[complex]) -> GradedOperator:
    t = tuple(complex(x) for x in t)
    if len(t) != T.params.c:
        raise DimensionError(f"gauge parameter has {len(t)} entries, expected {T.params.c}")
    for x in t:
        if abs(abs(x) - 1.0) > 1e-12:
            raise ParameterError(f"gauge parameters must lie on the unit circle, got {x}")
    comps = {}
    for d, m in T.components.items():
        phase = complex(np.prod([x**k for x, k in zip(t, d)])) if d else 1.0
        comps[d] = phase * m
    return GradedOperator(T.params, comps)


# elementary Toeplitz operators ------------------------------------------


@dataclass(frozen=True)
class ElementaryOps:
    """Truncated ``S``, ``P``, ``Q``, ``C_q``, ``D_q`` and ``I`` on ``C^N``."""

    N: int
    q: float
    S: sp.csr_matrix
    P: sp.csr_matrix
    Q: sp.csr_matrix
    C: sp.csr_matrix
    D: sp.csr_matrix
    I: sp.csr_matrix

    @property
    def Sstar(self) -> sp.csr_matrix:
        return self.S.conj().T.tocsr()


def check_q(q: float, *, allow_zero: bool = True) -> float:
    q = float(q)
    lo_ok = q >= 0.0 if allow_zero else q > 0.0
    if not (lo_ok and q < 1.0):
        interval = "[0, 1)" if allow_zero else "(0, 1)"
        raise ParameterError(f"q must lie in {interval}, got {q}")
    return q


def elementary(N: int, q: float) -> ElementaryOps:
    q = check_q(q)
    n = np.arange(N)
    S = sp.diags(np.ones(N - 1), -1, shape=(N, N), format="csr", dtype=np.complex128)
    P = sp.csr_matrix(([1.0], ([0], [0])), shape=(N, N), dtype=np.complex128)
    I = sp.identity(N, format="csr", dtype=np.complex128)
    Q = (I - P).tocsr()
    Q.eliminate_zeros()
    # 0**0 == 1 in numpy, so D_0 = P and C_0 = Q exactly
    dq = q**n
    cq = np.sqrt(np.clip(1.0 - q ** (2 * n), 0.0, None))
    C = _as_csr(sp.diags(cq, 0, shape=(N, N)))
    D = _as_csr(sp.diags(dq, 0, shape=(N, N)))
    return ElementaryOps(N, q, S, P, Q, C, D, I)


# residuals and norms ----------------------------------------------------


def _core(params: TruncationParams, core: CoreSubspace | None) -> CoreSubspace:
    return core if core is not None else CoreSubspace(params)


def core_residual(lhs: GradedOperator, rhs: GradedOperator | None = None, core: CoreSubspace | None = None) -> float:
    """Max over core basis vectors ``v`` of ``||(lhs - rhs) v||``.

    Distinct degrees are orthogonal, so their contributions add in quadrature.
    """
    diff = lhs if rhs is None else lhs - rhs
    cols = _core(diff.params, core).indices
    sq = np.zeros(len(cols))
    for m in diff.components.values():
        block = m[:, cols]
        sq += np.asarray(abs(block).power(2).sum(axis=0)).ravel()
    return float(np.sqrt(sq.max())) if len(sq) else 0.0


def full_residual(lhs: GradedOperator, rhs: GradedOperator | None = None) -> float:
    """Same as :func:`core_residual` but over every basis vector."""
    diff = lhs if rhs is None else lhs - rhs
    sq = np.zeros(diff.params.dim)
    for m in diff.components.values():
        sq += np.asarray(abs(m).power(2).sum(axis=0)).ravel()
    return float(np.sqrt(sq.max())) if len(sq) else 0.0


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    iterations: int


def estimate_norm(
    T: GradedOperator,
    core: CoreSubspace | None = None,
    tol: float = 1e-10,
    max_iter: int = 20000,
    seed: int = 0,
) -> NormEstimate:
    """Largest singular value of ``T`` restricted to the core, by power iteration on ``T*T``."""
    cols = _core(T.params, core).indices
    blocks = [m[:, cols].tocsr() for m in T.components.values()]
    if not blocks:
        return NormEstimate(0.0, True, 0)
    blocks_h = [b.conj().T.tocsr() for b in blocks]
    n = len(cols)

    if n <= DENSE_GRAM_LIMIT:
        G = np.zeros((n, n), dtype=np.complex128)
        for b, bh in zip(blocks, blocks_h):
            G += (bh @ b).toarray()
        scale = np.abs(G).sum(axis=0).max()
        if scale == 0.0:
            return NormEstimate(0.0, True, 0)
        G /= scale
        # each step applies G^(2^s): near-degenerate leading values still separate quickly
        H = G.copy()
        for _ in range(GRAM_SQUARINGS):
            H = H @ H
            H /= max(np.abs(H).max(), 1e-300)
        gram = lambda x: G @ x  # noqa: E731
        step = lambda x: H @ x  # noqa: E731
    else:
        scale = 1.0

        def gram(x: np.ndarray) -> np.ndarray:
            y = np.zeros_like(x)
            for b, bh in zip(blocks, blocks_h):
                y += bh @ (b @ x)
            return y

        step = gram

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = step(x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return NormEstimate(0.0, True, it)
        x = y / ny
        new = float(np.vdot(x, gram(x)).real)
        if it > 1 and abs(new - lam) <= tol * max(abs(new), 1e-300):
            return NormEstimate(float(np.sqrt(max(new * scale, 0.0))), True, it)
        lam = new
    return NormEstimate(float(np.sqrt(max(lam * scale, 0.0))), False, max_iter)


def op_norm_core(T: GradedOperator, core: CoreSubspace | None = None, tol: float = 1e-10, seed: int = 0) -> float:
    est = estimate_norm(T, core, tol=tol, seed=seed)
    if not est.converged:
        warnings.warn(f"power iteration hit its cap; best estimate {est.value:.6g}", NumericalWarning, stacklevel=2)
    return est.value


def core_compression(T: GradedOperator, core: CoreSubspace | None = None) -> np.ndarray:
    """Dense core-to-core block of the degree-zero part of ``T``."""
    cols = _core(T.params, core).indices
    m = T.component(T.params.zero_degree)
    return m[cols][:, cols].toarray()


def sqrt_positive(T: GradedOperator) -> GradedOperator:
    """Square root of a positive degree-zero operator (diagonal fast path)."""
    if T.is_zero:
        return T
    if T.degrees != [T.params.zero_degree]:
        raise ParameterError("square root needs a degree-zero operator")
    m = T.component(T.params.zero_degree)
    off = m - sp.diags(m.diagonal())
    if off.nnz == 0 or np.max(np.abs(off.data)) == 0.0:
        root = sp.diags(np.sqrt(np.clip(m.diagonal().real, 0.0, None)))
    else:
        w, v = np.linalg.eigh(m.toarray())
        root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return GradedOperator.homogeneous(T.params, root)


def graded_basis_vector(params: TruncationParams, idx: Sequence[int], degree: Degree | None = None) -> dict[Degree, np.ndarray]:
    v = np.zeros(params.dim, dtype=np.complex128)
    v[basis_index(params, idx)] = 1.0
    return {params.zero_degree if degree is None else tuple(degree): v}

