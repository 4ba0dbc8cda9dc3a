from __future__ import annotations

import json

import pytest

from kgraph.cli import CSV_HEADER, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

NON_COMMUTING = """RANK 2
VERTICES
1 a
2 b
EDGES
1 1 a b
2 1 b b
3 2 a a
4 2 b a
SQUARES
"""


@pytest.fixture
def su3_file(tmp_path):
    path = tmp_path / "su3.kg"
    assert main(["export-su3", str(path)]) == EXIT_OK
    return path


def test_export_then_validate(su3_file, capsys):
    capsys.readouterr()
    assert main(["validate", str(su3_file)]) == EXIT_OK
    assert main(["validate", str(su3_file), "--format", "json"]) == EXIT_OK
    out = capsys.readouterr().out
    payload = json.loads(out[out.index("{"):])
    assert payload["ok"] is True


def test_export_to_stdout(capsys):
    assert main(["export-su3", "-"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("RANK 2\n")
    assert out.count("=") == 23


def test_missing_squares_fails(su3_file, tmp_path, capsys):
    text = su3_file.read_text()
    truncated = tmp_path / "nosq.kg"
    truncated.write_text(text[: text.index("SQUARES")] + "SQUARES\n")
    assert main(["validate", str(truncated)]) == EXIT_FAIL
    assert "IncompleteTableError" in capsys.readouterr().err


def test_non_commuting_fails(tmp_path, capsys):
    path = tmp_path / "nc.kg"
    path.write_text(NON_COMMUTING)
    assert main(["validate", str(path)]) == EXIT_FAIL
    assert "commuting" in capsys.readouterr().err


def test_parse_error_is_usage(tmp_path, capsys):
    path = tmp_path / "bad.kg"
    path.write_text("RANK 2\nVERTICES\n1 a\nEDGES\n1 1 a zz\n")
    assert main(["validate", str(path)]) == EXIT_USAGE
    assert "line 5" in capsys.readouterr().err


def test_missing_file_is_usage(tmp_path):
    assert main(["validate", str(tmp_path / "absent.kg")]) == EXIT_USAGE


@pytest.mark.parametrize(
    "source, target, degree, count",
    [("CZ", "AX", "1,1", 1), ("CZ", "AY", "1,1", 2), ("CZ", "CZ", "0,0", 1), ("AX", "CZ", "1,1", 0)],
)
def test_paths(su3_file, capsys, source, target, degree, count):
    capsys.readouterr()
    assert main(["paths", str(su3_file), "--from", source, "--to", target, "--degree", degree]) == EXIT_OK
    out = capsys.readouterr().out.strip().splitlines()
    assert out[-1] == f"count: {count}"
    assert len(out) == count + 1


def test_paths_bad_degree(su3_file):
    assert main(["paths", str(su3_file), "--degree", "1,1,1"]) == EXIT_USAGE
    assert main(["paths", str(su3_file), "--degree", "x"]) == EXIT_USAGE
    assert main(["paths", str(su3_file), "--from", "QQ", "--degree", "1,0"]) == EXIT_USAGE


def test_su3_verify_json_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["su3-verify", "--out", str(a)]) == EXIT_OK
    assert main(["su3-verify", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    payload = json.loads(a.read_text())
    assert payload["schema"] == 1
    assert payload["ok"] is True


def test_su3_verify_tight_tolerance(tmp_path, capsys):
    assert main(["su3-verify", "--tol", "1e-16", "--format", "text", "--out", str(tmp_path / "r.txt")]) == EXIT_OK


def test_su3_verify_rejects_small_dimension():
    assert main(["su3-verify", "--dim", "4"]) == EXIT_USAGE


def test_su3_verify_resource_cap(capsys):
    assert main(["su3-verify", "--max-nnz", "100"]) == EXIT_USAGE
    assert "cap" in capsys.readouterr().err


def test_qlimit_single_curve(tmp_path):
    out = tmp_path / "q.csv"
    assert main(["qlimit", "--which", "1,1", "--no-series", "--out", str(out)]) == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0] == CSV_HEADER
    slope = [r for r in rows if r.startswith("slope/")]
    assert len(slope) == 1
    assert abs(float(slope[0].split(",")[-1]) - 1.0) < 0.15


def test_qlimit_series_rows(capsys):
    assert main(["qlimit", "--which", "1,2", "--q", "0.1,0.05", "--series-K", "3"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()
    series = [r for r in rows if r.startswith("series/")]
    assert len(series) == 9
    assert all(float(r.split(",")[-1]) >= 0 for r in series)


@pytest.mark.parametrize("argv", [["--q", "1.5"], ["--q", "0"], ["--series-q", "2"], ["--which", "3,1"], ["--q", "a,b"]])
def test_qlimit_bad_arguments(argv):
    assert main(["qlimit", "--no-series", *argv]) == EXIT_USAGE


def test_unknown_command():
    assert main(["frobnicate"]) == EXIT_USAGE
