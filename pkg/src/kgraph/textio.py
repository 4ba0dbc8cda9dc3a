"""Line-based k-graph text format.

::

    RANK 2
    VERTICES
    1 CZ
    EDGES
    1 1 CZ CZ C
    SQUARES
    1 13 = 13 1

``#`` starts a comment.  Edge endpoints may be vertex labels or indices;
squares refer to edge ids and read left to right.  :func:`dump` writes the
canonical form, which :func:`parse` reads back unchanged.
"""

from __future__ import annotations

from pathlib import Path as FsPath

from .core import Edge, FactorizationSquare, FactorizationTable, Skeleton, Vertex
from .errors import KGraphError, ParseError

SECTIONS = ("VERTICES", "EDGES", "SQUARES")


def _int(token: str, what: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {token!r}", line) from None


def parse(text: str) -> tuple[Skeleton, FactorizationTable]:
    k = None
    section = None
    vertices: list[Vertex] = []
    raw_edges: list[tuple[int, int, str, str, str | None, int]] = []
    raw_squares: list[tuple[list[int], int]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "RANK":
            if k is not None:
                raise ParseError("duplicate RANK line", lineno)
            if len(tokens) != 2:
                raise ParseError("RANK takes exactly one integer", lineno)
            k = _int(tokens[1], "rank", lineno)
            if k < 1:
                raise ParseError(f"rank must be positive, got {k}", lineno)
            continue
        if head in SECTIONS and len(tokens) == 1:
            if head in seen:
                raise ParseError(f"duplicate {head} section", lineno)
            seen.add(head)
            section = head
            continue
        if section is None:
            raise ParseError(f"unexpected line outside any section: {line!r}", lineno)
        if section == "VERTICES":
            if len(tokens) != 2:
                raise ParseError("vertex lines are 'index label'", lineno)
            vertices.append(Vertex(_int(tokens[0], "vertex index", lineno), tokens[1]))
        elif section == "EDGES":
            if len(tokens) not in (4, 5):
                raise ParseError("edge lines are 'id color source range [label]'", lineno)
            label = tokens[4] if len(tokens) == 5 else None
            raw_edges.append(
                (_int(tokens[0], "edge id", lineno), _int(tokens[1], "colour", lineno), tokens[2], tokens[3], label, lineno)
            )
        else:
            if len(tokens) != 5 or tokens[2] != "=":
                raise ParseError("square lines are 'e1 e2 = e3 e4'", lineno)
            ids = [_int(t, "edge id", lineno) for t in (tokens[0], tokens[1], tokens[3], tokens[4])]
            raw_squares.append((ids, lineno))
    if k is None:
        raise ParseError("missing RANK line", 1)
    by_label = {v.label: v.label for v in vertices}
    by_index = {str(v.index): v.label for v in vertices}

    def resolve(token: str, lineno: int) -> str:
        if token in by_label:
            return token
        if token in by_index:
            return by_index[token]
        raise ParseError(f"unknown vertex {token!r}", lineno)

    edges = [Edge(i, c, resolve(s, ln), resolve(r, ln), lab) for i, c, s, r, lab, ln in raw_edges]
    skeleton = Skeleton(k, tuple(vertices), tuple(edges))
    by_id = {e.id: e for e in edges}
    squares = []
    for ids, lineno in raw_squares:
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise ParseError(f"square refers to unknown edge id {missing[0]}", lineno)
        try:
            squares.append(FactorizationSquare(*(by_id[i] for i in ids)))
        except KGraphError as exc:
            raise ParseError(str(exc), lineno) from None
    return skeleton, FactorizationTable(tuple(squares))


def dump(skeleton: Skeleton, table: FactorizationTable) -> str:
    lines = [f"RANK {skeleton.k}", "VERTICES"]
    lines += [f"{v.index} {v.label}" for v in skeleton.vertices]
    lines.append("EDGES")
    for e in skeleton.edges:
        fields = [str(e.id), str(e.color), e.source, e.range]
        if e.label is not None:
            fields.append(e.label)
        lines.append(" ".join(fields))
    lines.append("SQUARES")
    lines += [f"{sq.first_lo.id} {sq.second_lo.id} = {sq.first_hi.id} {sq.second_hi.id}" for sq in table]
    return "\n".join(lines) + "\n"


def load(path) -> tuple[Skeleton, FactorizationTable]:
    return parse(FsPath(path).read_text(encoding="utf-8"))


def save(path, skeleton: Skeleton, table: FactorizationTable) -> None:
    FsPath(path).write_text(dump(skeleton, table), encoding="utf-8")
