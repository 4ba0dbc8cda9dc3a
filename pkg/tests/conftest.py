from __future__ import annotations

import pytest

from kgraph import ck, su3
from kgraph.core import Edge, FactorizationSquare, FactorizationTable, Skeleton, Vertex, validate_factorization
from kgraph.qdeform import hat_ops


@pytest.fixture(scope="session")
def su3_graph():
    return su3.build()


@pytest.fixture(scope="session")
def hat():
    return hat_ops(10, 6)


@pytest.fixture(scope="session")
def assignment(su3_graph, hat):
    return ck.edge_operators(su3_graph, hat)


def one_vertex(k: int = 2):
    """One vertex with a single loop of each colour; every square swaps two loops."""
    loops = [Edge(c, c, "v", "v", f"l{c}") for c in range(1, k + 1)]
    s = Skeleton(k, (Vertex(1, "v"),), tuple(loops))
    squares = [
        FactorizationSquare(loops[i], loops[j], loops[j], loops[i])
        for i in range(k)
        for j in range(i + 1, k)
    ]
    return s, FactorizationTable(tuple(squares))


@pytest.fixture
def one_vertex_graph():
    s, t = one_vertex(2)
    return validate_factorization(s, t)
