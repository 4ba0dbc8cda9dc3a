"""Rank-k graphs from coloured skeletons and factorization squares.

Paths are written left to right: the edge traversed first is listed first, so
a word ``[e1, e2]`` runs from ``source(e1)`` to ``range(e2)``.  A square
``a b = c d`` identifies two such two-colour words with the same endpoints.
The normal form of a morphism lists its colour-1 edges first, then colour 2,
and so on; it is reached by swapping adjacent out-of-order pairs through the
squares.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    AmbiguousTableError,
    CommutationError,
    CompositionError,
    CubeConsistencyError,
    DegreeError,
    IncompleteTableError,
    StructureError,
)
from .report import VerificationReport

DegreeVector = tuple[int, ...]


@dataclass(frozen=True)
class Vertex:
    index: int
    label: str


@dataclass(frozen=True)
class Edge:
    """A skeleton edge; ``source`` and ``range`` are vertex labels, colours start at 1."""

    id: int
    color: int
    source: str
    range: str
    label: str | None = None

    @property
    def name(self) -> str:
        tag = self.label if self.label is not None else f"e{self.id}"
        if self.source == self.range:
            return f"{tag}@{self.source}"
        return f"{tag}:{self.source}->{self.range}"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Skeleton:
    k: int
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def _by_label(self) -> dict[str, Vertex]:
        return {v.label: v for v in self.vertices}

    @cached_property
    def _by_id(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    def vertex(self, label: str) -> Vertex:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def edge(self, edge_id: int) -> Edge:
        return self._by_id[edge_id]

    def edge_named(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(f"no edge named {name!r}")

    @property
    def labels(self) -> list[str]:
        return [v.label for v in sorted(self.vertices, key=lambda v: v.index)]

    def edges_of_color(self, color: int) -> list[Edge]:
        return [e for e in self.edges if e.color == color]

    @cached_property
    def _incoming(self) -> dict[tuple[str, int], list[Edge]]:
        out: dict[tuple[str, int], list[Edge]] = defaultdict(list)
        for e in self.edges:
            out[(e.range, e.color)].append(e)
        return out

    @cached_property
    def _outgoing(self) -> dict[tuple[str, int], list[Edge]]:
        out: dict[tuple[str, int], list[Edge]] = defaultdict(list)
        for e in self.edges:
            out[(e.source, e.color)].append(e)
        return out

    def incoming(self, v: str, color: int) -> list[Edge]:
        return list(self._incoming.get((v, color), ()))

    def outgoing(self, v: str, color: int) -> list[Edge]:
        return list(self._outgoing.get((v, color), ()))

    def without(self, *edge_names: str) -> "Skeleton":
        drop = set(edge_names)
        return Skeleton(self.k, self.vertices, tuple(e for e in self.edges if e.name not in drop))


def check_structure(s: Skeleton) -> None:
    """Raise :class:`StructureError` for dangling endpoints, bad colours or duplicate ids/labels."""
    labels = [v.label for v in s.vertices]
    if len(set(labels)) != len(labels):
        raise StructureError("vertex labels are not unique", sorted({x for x in labels if labels.count(x) > 1}))
    indices = sorted(v.index for v in s.vertices)
    if indices != list(range(1, len(indices) + 1)):
        raise StructureError(f"vertex indices must be 1..{len(indices)}, got {indices}")
    ids = [e.id for e in s.edges]
    if len(set(ids)) != len(ids):
        raise StructureError("edge ids are not unique", sorted({x for x in ids if ids.count(x) > 1}))
    known = set(labels)
    bad = [e.name for e in s.edges if e.source not in known or e.range not in known]
    if bad:
        raise StructureError(f"edges with unknown endpoints: {', '.join(bad)}", bad)
    bad = [e.name for e in s.edges if not 1 <= e.color <= s.k]
    if bad:
        raise StructureError(f"edges with colour outside 1..{s.k}: {', '.join(bad)}", bad)


def validate_skeleton(s: Skeleton) -> VerificationReport:
    """Row-finiteness, per-colour sources/sinks and local convexity."""
    check_structure(s)
    report = VerificationReport()
    report.flag("skeleton/row_finite", True, vertices=len(s.vertices), edges=len(s.edges))
    for c in range(1, s.k + 1):
        no_in = [v for v in s.labels if not s.incoming(v, c)]
        no_out = [v for v in s.labels if not s.outgoing(v, c)]
        report.flag(f"skeleton/receives/color{c}", not no_in, vertices=no_in)
        report.flag(f"skeleton/emits/color{c}", not no_out, vertices=no_out)
    offenders: set[str] = set()
    for i, j in product(range(1, s.k + 1), repeat=2):
        if i == j:
            continue
        for f in s.edges_of_color(j):
            for g in s.incoming(f.range, i):
                if not s.incoming(f.source, i):
                    offenders.add(f.source)
                if not s.incoming(g.source, j):
                    offenders.add(g.source)
    report.flag("skeleton/locally_convex", not offenders, vertices=sorted(offenders, key=lambda v: s.vertex(v).index))
    return report


def transition_matrix(s: Skeleton, color: int) -> np.ndarray:
    """Entry ``(i, j)`` counts colour-``color`` edges from vertex ``j`` to vertex ``i``."""
    n = len(s.vertices)
    M = np.zeros((n, n), dtype=np.int64)
    for e in s.edges_of_color(color):
        M[s.vertex(e.range).index - 1, s.vertex(e.source).index - 1] += 1
    return M


def check_commuting(s: Skeleton) -> VerificationReport:
    report = VerificationReport()
    mats = {c: transition_matrix(s, c) for c in range(1, s.k + 1)}
    for a in range(1, s.k + 1):
        for b in range(a + 1, s.k + 1):
            ab, ba = mats[a] @ mats[b], mats[b] @ mats[a]
            diff = ab - ba
            where = [(s.labels[i], s.labels[j]) for i, j in zip(*np.nonzero(diff))]
            report.add(
                f"commuting/{a}{b}",
                float(np.abs(diff).max()) if diff.size else 0.0,
                0.0,
                product=ab.tolist(),
                mismatch=where,
            )
    return report


# factorization squares ---------------------------------------------------


@dataclass(frozen=True)
class FactorizationSquare:
    """``[first_lo, second_lo] = [first_hi, second_hi]``, words read left to right."""

    first_lo: Edge
    second_lo: Edge
    first_hi: Edge
    second_hi: Edge

    def __post_init__(self) -> None:
        a, b, c, d = self.first_lo, self.second_lo, self.first_hi, self.second_hi
        if a.range != b.source or c.range != d.source:
            raise CompositionError(f"square {self} has a non-composable side")
        if a.source != c.source or b.range != d.range:
            raise CompositionError(f"square {self}: sides do not share endpoints")
        if a.color == b.color or a.color != d.color or b.color != c.color:
            raise CompositionError(f"square {self}: colours must be (c1 c2 = c2 c1) with c1 != c2")

    @property
    def lo(self) -> tuple[Edge, Edge]:
        return (self.first_lo, self.second_lo)

    @property
    def hi(self) -> tuple[Edge, Edge]:
        return (self.first_hi, self.second_hi)

    def __str__(self) -> str:
        return f"{self.first_lo} {self.second_lo} = {self.first_hi} {self.second_hi}"


@dataclass(frozen=True)
class FactorizationTable:
    squares: tuple[FactorizationSquare, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "squares", tuple(self.squares))

    def __len__(self) -> int:
        return len(self.squares)

    def __iter__(self) -> Iterator[FactorizationSquare]:
        return iter(self.squares)

    def without(self, predicate) -> "FactorizationTable":
        return FactorizationTable(tuple(sq for sq in self.squares if not predicate(sq)))


def composable_pairs(s: Skeleton) -> list[tuple[Edge, Edge]]:
    """All two-colour composable pairs, out-of-order (descending colour) pairs first."""
    pairs = []
    for a in s.edges:
        for b in s.edges:
            if a.color != b.color and a.range == b.source:
                pairs.append((a, b))
    pairs.sort(key=lambda p: (p[0].color < p[1].color, p[0].id, p[1].id))
    return pairs


def _pair_name(p: tuple[Edge, Edge]) -> str:
    return f"({p[0].name}, {p[1].name})"


@dataclass(frozen=True)
class Path:
    """A morphism in normal form: one block of edges per colour, colour 1 first."""

    source: str
    range: str
    blocks: tuple[tuple[Edge, ...], ...]

    @property
    def degree(self) -> DegreeVector:
        return tuple(len(b) for b in self.blocks)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(e for b in self.blocks for e in b)

    @property
    def edges_by_color(self) -> dict[int, tuple[Edge, ...]]:
        return {c + 1: b for c, b in enumerate(self.blocks)}

    @property
    def is_identity(self) -> bool:
        return not any(self.blocks)

    def names(self) -> list[str]:
        return [e.name for e in self.edges]

    def __len__(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __str__(self) -> str:
        if self.is_identity:
            return f"id@{self.source}"
        return " ".join(self.names())


def identity_path(g: "KGraph | Skeleton", v: str) -> Path:
    s = g.skeleton if isinstance(g, KGraph) else g
    s.vertex(v)
    return Path(v, v, tuple(() for _ in range(s.k)))


@dataclass(frozen=True)
class KGraph:
    """A validated rank-k graph; build it through :func:`validate_factorization`."""

    skeleton: Skeleton
    table: FactorizationTable
    validated: bool = False
    _swap: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.skeleton.k

    def swap(self, a: Edge, b: Edge) -> tuple[Edge, Edge]:
        """The other side of the square containing ``[a, b]``."""
        try:
            return self._swap[(a.id, b.id)]
        except KeyError:
            raise IncompleteTableError(f"no square contains {_pair_name((a, b))}", (a.name, b.name)) from None

    def normal_form(self, word: Sequence[Edge]) -> Path:
        return normal_form(self, word)

    def factor(self, p: Path, n: DegreeVector) -> tuple[Path, Path]:
        return factor(self, p, n)

    def enumerate_paths(self, v: str, n: DegreeVector, direction: str = "range") -> list[Path]:
        return enumerate_paths(self, v, n, direction)


def _build_swap(s: Skeleton, t: FactorizationTable) -> dict:
    ids = {e.id for e in s.edges}
    cover: dict[tuple[int, int], list[tuple[Edge, Edge]]] = defaultdict(list)
    for sq in t:
        for e in (*sq.lo, *sq.hi):
            if e.id not in ids or s.edge(e.id) != e:
                raise StructureError(f"square {sq} uses edge {e.name} absent from the skeleton", [e.name])
        cover[(sq.first_lo.id, sq.second_lo.id)].append(sq.hi)
        cover[(sq.first_hi.id, sq.second_hi.id)].append(sq.lo)
    return cover


def validate_factorization(s: Skeleton, t: FactorizationTable) -> KGraph:
    """Check totality and bijectivity of the squares (and cube consistency for k >= 3)."""
    check_structure(s)
    comm = check_commuting(s)
    if not comm.ok:
        bad = comm.failures[0]
        raise CommutationError(f"transition matrices do not commute ({bad.name}) at {bad.params['mismatch']}")
    cover = _build_swap(s, t)
    missing = [p for p in composable_pairs(s) if (p[0].id, p[1].id) not in cover]
    if missing:
        err = IncompleteTableError(
            f"incomplete table: no square for {_pair_name(missing[0])}"
            + (f" (+{len(missing) - 1} more)" if len(missing) > 1 else ""),
            (missing[0][0].name, missing[0][1].name),
        )
        err.missing = [(a.name, b.name) for a, b in missing]
        raise err
    for (a_id, b_id), partners in cover.items():
        if len(partners) > 1:
            pair = (s.edge(a_id), s.edge(b_id))
            raise AmbiguousTableError(f"ambiguous table: {len(partners)} squares contain {_pair_name(pair)}", (pair[0].name, pair[1].name))
    swap = {key: partners[0] for key, partners in cover.items()}
    g = KGraph(s, t, True, swap)
    if s.k >= 3:
        _check_cubes(g)
    return g


def _check_cubes(g: KGraph) -> None:
    s = g.skeleton
    for a in s.edges:
        for b in (e for e in s.edges if e.source == a.range):
            if b.color == a.color:
                continue
            for c in (e for e in s.edges if e.source == b.range):
                if len({a.color, b.color, c.color}) != 3:
                    continue
                forms = all_normal_forms(g, [a, b, c])
                if len(forms) != 1:
                    raise CubeConsistencyError(
                        f"three-colour word {a.name} {b.name} {c.name} has {len(forms)} distinct normal forms"
                    )


# rewriting ---------------------------------------------------------------


def check_composable(word: Sequence[Edge]) -> None:
    for i in range(len(word) - 1):
        if word[i].range != word[i + 1].source:
            raise CompositionError(
                f"cannot compose {word[i].name} then {word[i + 1].name}: {word[i].range} != {word[i + 1].source}",
                position=i,
            )


def to_pattern(g: KGraph, word: Sequence[Edge], colors: Sequence[int]) -> list[Edge]:
    """The unique word equal to ``word`` whose colour sequence is ``colors``."""
    word = list(word)
    if sorted(e.color for e in word) != sorted(colors):
        raise DegreeError("target colour pattern has a different degree")
    # i-th occurrence of colour c moves to the slot of the i-th c in the pattern
    slots: dict[int, list[int]] = defaultdict(list)
    for pos, c in enumerate(colors):
        slots[c].append(pos)
    seen: dict[int, int] = defaultdict(int)
    rank = []
    for e in word:
        rank.append(slots[e.color][seen[e.color]])
        seen[e.color] += 1
    changed = True
    while changed:
        changed = False
        for i in range(len(word) - 1):
            if rank[i] > rank[i + 1]:
                word[i], word[i + 1] = g.swap(word[i], word[i + 1])
                rank[i], rank[i + 1] = rank[i + 1], rank[i]
                changed = True
    return word


def _path_from_sorted(k: int, word: Sequence[Edge], source: str) -> Path:
    blocks = tuple(tuple(e for e in word if e.color == c) for c in range(1, k + 1))
    rng = word[-1].range if word else source
    return Path(source, rng, blocks)


def normal_form(g: KGraph, word: Sequence[Edge], at: str | None = None) -> Path:
    """Sort ``word`` into colour blocks through the squares.

    ``at`` names the vertex of an empty word.
    """
    word = list(word)
    if not word:
        if at is None:
            raise CompositionError("an empty word needs a vertex")
        return identity_path(g, at)
    check_composable(word)
    colors = sorted(e.color for e in word)
    return _path_from_sorted(g.k, to_pattern(g, word, colors), word[0].source)


def rewrite_successors(g: KGraph, word: tuple[Edge, ...]) -> list[tuple[Edge, ...]]:
    """Words reachable by swapping one adjacent out-of-order pair."""
    out = []
    for i in range(len(word) - 1):
        if word[i].color > word[i + 1].color:
            a, b = g.swap(word[i], word[i + 1])
            out.append(word[:i] + (a, b) + word[i + 2 :])
    return out


def all_normal_forms(g: KGraph, word: Sequence[Edge]) -> set[tuple[int, ...]]:
    """Terminal words (as id tuples) over every order of applying the rewrites."""
    start = tuple(word)
    check_composable(start)
    seen = {start}
    stack = [start]
    terminal = set()
    while stack:
        w = stack.pop()
        nxt = rewrite_successors(g, w)
        if not nxt:
            terminal.add(tuple(e.id for e in w))
        for x in nxt:
            if x not in seen:
                seen.add(x)
                stack.append(x)
    return terminal


def compose(g: KGraph, first: Path, second: Path) -> Path:
    """``first`` then ``second``."""
    if first.range != second.source:
        raise CompositionError(f"cannot compose: {first.range} != {second.source}")
    if first.is_identity:
        return second
    if second.is_identity:
        return first
    return normal_form(g, list(first.edges) + list(second.edges))


def factor(g: KGraph, p: Path, n: DegreeVector) -> tuple[Path, Path]:
    """Split ``p`` as ``head`` then ``tail`` with ``degree(head) = n``."""
    n = tuple(int(x) for x in n)
    deg = p.degree
    if len(n) != len(deg) or any(a < 0 or a > b for a, b in zip(n, deg)):
        raise DegreeError(f"degree {n} is not below {deg}")
    head_colors = [c + 1 for c, m in enumerate(n) for _ in range(m)]
    tail_colors = [c + 1 for c, m in enumerate(deg) for _ in range(m - n[c])]
    word = to_pattern(g, p.edges, head_colors + tail_colors)
    h = len(head_colors)
    head_word, tail_word = word[:h], word[h:]
    mid = head_word[-1].range if head_word else p.source
    head = _path_from_sorted(g.k, head_word, p.source) if head_word else identity_path(g, p.source)
    tail = _path_from_sorted(g.k, tail_word, mid) if tail_word else identity_path(g, mid)
    return head, tail


def enumerate_paths(g: KGraph, v: str, n: DegreeVector, direction: str = "range") -> list[Path]:
    """All normal-form paths of degree ``n`` with the given range (or source) ``v``."""
    s = g.skeleton
    s.vertex(v)
    n = tuple(int(x) for x in n)
    if len(n) != s.k or any(x < 0 for x in n):
        raise DegreeError(f"bad degree {n} for a rank-{s.k} graph")
    colors = [c + 1 for c, m in enumerate(n) for _ in range(m)]
    if not colors:
        return [identity_path(g, v)]
    words: list[list[Edge]] = []
    if direction == "range":

        def back(pos: int, at: str, suffix: list[Edge]) -> None:
            if pos < 0:
                words.append(suffix)
                return
            for e in sorted(s.incoming(at, colors[pos]), key=lambda e: e.id):
                back(pos - 1, e.source, [e] + suffix)

        back(len(colors) - 1, v, [])
    elif direction == "source":

        def fwd(pos: int, at: str, prefix: list[Edge]) -> None:
            if pos == len(colors):
                words.append(prefix)
                return
            for e in sorted(s.outgoing(at, colors[pos]), key=lambda e: e.id):
                fwd(pos + 1, e.range, prefix + [e])

        fwd(0, v, [])
    else:
        raise ValueError(f"direction must be 'range' or 'source', got {direction!r}")
    paths = [_path_from_sorted(s.k, w, w[0].source) for w in words]
    paths.sort(key=lambda p: ([s.vertex(p.source).index, s.vertex(p.range).index], [e.id for e in p.edges]))
    return paths


def count_matrix(s: Skeleton, n: DegreeVector) -> np.ndarray:
    """Product of transition matrices: entry ``(v, u)`` counts degree-``n`` paths ``u -> v``."""
    out = np.identity(len(s.vertices), dtype=np.int64)
    for c, m in enumerate(n):
        M = transition_matrix(s, c + 1)
        for _ in range(m):
            out = M @ out
    return out


def words_of_length(s: Skeleton, length: int) -> Iterable[list[Edge]]:
    """Every composable word with ``length`` edges."""
    def extend(prefix: list[Edge]) -> Iterable[list[Edge]]:
        if len(prefix) == length:
            yield prefix
            return
        for e in s.edges:
            if not prefix or prefix[-1].range == e.source:
                yield from extend(prefix + [e])

    if length == 0:
        return iter(())
    return extend([])
