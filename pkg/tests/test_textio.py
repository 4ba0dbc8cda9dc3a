from __future__ import annotations

import pytest

from kgraph import su3
from kgraph.core import validate_factorization
from kgraph.errors import ParseError
from kgraph.textio import dump, load, parse, save


def test_round_trip_is_bit_exact():
    text = su3.export()
    s, t = parse(text)
    assert dump(s, t) == text
    g = validate_factorization(s, t)
    assert len(g.table) == 23


def test_file_round_trip(tmp_path):
    path = tmp_path / "su3.kg"
    s, t = parse(su3.export())
    save(path, s, t)
    s2, t2 = load(path)
    assert s2 == s and t2 == t


def test_comments_blank_lines_and_indices():
    text = """# one vertex, two loops
RANK 2

VERTICES
1 v   # the only vertex
EDGES
1 1 1 1 a
2 2 v v
SQUARES
1 2 = 2 1
"""
    s, t = parse(text)
    assert s.edges[0].source == "v"
    assert s.edges[1].label is None
    assert dump(s, t).splitlines()[4] == "1 1 v v a"
    validate_factorization(s, t)


def test_missing_squares_section_parses_to_empty_table():
    text = su3.export().split("SQUARES")[0]
    _, t = parse(text)
    assert len(t) == 0


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("VERTICES\n1 v\n", 1, "missing RANK"),
        ("RANK 2\n1 v\n", 2, "outside any section"),
        ("RANK x\n", 1, "integer rank"),
        ("RANK 1\nVERTICES\n1 v\nEDGES\n1 1 v w\n", 5, "unknown vertex"),
        ("RANK 1\nVERTICES\n1 v\nEDGES\n1 1 v\n", 5, "edge lines"),
        ("RANK 2\nVERTICES\n1 v\nEDGES\n1 1 v v\nSQUARES\n1 9 = 9 1\n", 7, "unknown edge id"),
        ("RANK 2\nVERTICES\n1 v\nEDGES\n1 1 v v\n2 2 v v\nSQUARES\n1 2 - 2 1\n", 8, "square lines"),
        ("RANK 2\nVERTICES\n1 v\nEDGES\n1 1 v v\n2 2 v v\nSQUARES\n1 2 = 1 2\n", 8, "colours"),
        ("RANK 1\nRANK 1\n", 2, "duplicate RANK"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"line {line}:")
