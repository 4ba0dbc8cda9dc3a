from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from kgraph import ck
from kgraph.core import Edge, normal_form, validate_factorization
from kgraph.errors import ConfigurationError, ParameterError
from kgraph.graded import GradedOperator, core_residual, op_norm_core
from kgraph.qdeform import hat_ops

from conftest import one_vertex


# projections and edge operators


def test_projection_forms(hat):
    proj = ck.vertex_projections(hat)
    forms = ck.printed_forms(10, 6)
    for v in ck.VERTICES:
        assert core_residual(proj[v], forms[f"P_{v}"]) == 0.0
        assert proj[v].degree == (0, 0)
    total = sum((proj[v] for v in ck.VERTICES[1:]), proj["CZ"])
    assert core_residual(total, GradedOperator.identity(total.params)) == 0.0


def test_hat_identity_suite(hat):
    report = ck.check_hat_identities(hat)
    assert report.ok
    assert report.max_residual("hat/") <= 1e-12
    assert "hat/unity/red" in report and "hat/Y*Y" in report


def test_edge_operator_example(assignment, su3_graph, hat):
    f = su3_graph.skeleton.edge_named("A:CY->AY")
    S = assignment.S(f)
    proj = assignment.vertex_projections
    assert S.equals(proj["AY"] @ hat["A"] @ proj["CY"])
    assert op_norm_core(S) > 0.9


def test_absent_edge_probe_is_zero(hat):
    proj = ck.vertex_projections(hat)
    assert ck.probe(hat, proj, "A", "CZ", "BX").is_zero


def test_reconstruction_of_a(assignment, hat):
    edges = [e for e in assignment.edge_isometries if e.label == "A"]
    assert len(edges) == 6
    total = sum((assignment.S(e) for e in edges[1:]), assignment.S(edges[0]))
    assert core_residual(total, hat["A"]) == 0.0


def test_missing_label_is_configuration_error(hat):
    s, t = one_vertex(2)
    with pytest.raises(ConfigurationError):
        ck.edge_operators(validate_factorization(s, t), hat)


# incidence


def test_incidence_equivalence(su3_graph, hat):
    report = ck.check_incidence(su3_graph, hat)
    assert report.ok
    assert report["incidence/adjacency"].params["probes"] == 216
    assert report["incidence/max_zero"].residual < 1e-8
    assert report["incidence/min_nonzero"].params["min_nonzero"] > 0.9


# Cuntz-Krieger relations


def test_ck_relations(assignment):
    report = ck.check_ck(assignment)
    assert report.ok
    assert report.max_residual() <= 1e-10
    assert report.max_residual("ck1") == 0.0
    names = {c.name for c in report}
    assert "ck4/AX/1,0" in names and "ck4/CZ/1,2" in names


def test_ck4_example(assignment, su3_graph):
    into_ax = [e for e in su3_graph.skeleton.edges_of_color(1) if e.range == "AX"]
    assert sorted(e.source for e in into_ax) == ["AX", "BX"]
    total = sum((assignment.S(e) @ assignment.S(e).H for e in into_ax[1:]), assignment.S(into_ax[0]) @ assignment.S(into_ax[0]).H)
    assert core_residual(total, assignment.P("AX")) <= 1e-12


def test_ck2_on_square(assignment, su3_graph):
    s = su3_graph.skeleton
    via_za = assignment.word_operator([s.edge_named("Z@CZ"), s.edge_named("A:CZ->AY")])
    via_by = assignment.word_operator([s.edge_named("B:CZ->BZ"), s.edge_named("Y:BZ->AY")])
    assert not via_za.is_zero
    assert core_residual(via_za, via_by) == 0.0


def test_ck2_detects_wrong_square(assignment, su3_graph):
    s = su3_graph.skeleton
    wrong = assignment.word_operator([s.edge_named("A:CZ->AY"), s.edge_named("Y@AY")])
    right = assignment.word_operator([s.edge_named("Z@CZ"), s.edge_named("A:CZ->AY")])
    assert core_residual(wrong, right) > 0.5


def test_ck4_degrees_sampled():
    degrees = ck.ck4_degrees(6)
    assert degrees[:5] == list(ck.CK4_DEGREES)
    assert len(degrees) == 8
    assert all(sum(n) <= 4 for n in degrees)
    assert degrees == ck.ck4_degrees(6)


def test_ck_rejects_deep_degree(assignment):
    with pytest.raises(ParameterError):
        ck.check_ck(assignment, [(3, 2)])


# gauge


def test_gauge(assignment):
    report = ck.check_gauge(assignment, [(2, 1), (1, 1)])
    assert report.ok
    for e, S in assignment.edge_isometries.items():
        assert S.degree == ((1, 0) if e.color == 1 else (0, 1))


def test_gauge_flags_inhomogeneous(assignment):
    e = next(iter(assignment.edge_isometries))
    bad = dict(assignment.edge_isometries)
    bad[e] = bad[e] + assignment.P(e.source)
    report = ck.check_gauge(ck.CKAssignment(assignment.graph, assignment.vertex_projections, bad))
    assert [c.name for c in report.failures] == [f"gauge/edge/{e.name}", "gauge/paths/2,1"]


def test_gauge_path_degree(assignment, su3_graph):
    for p in su3_graph.enumerate_paths("AX", (2, 1)):
        assert assignment.path_operator(p).degree == (2, 1)
    assert assignment.path_operator(su3_graph.enumerate_paths("AX", (0, 0))[0]).degree == (0, 0)


# relation list


def test_relation_list(hat):
    report = ck.check_relation_list(hat)
    assert report.ok
    assert len([c for c in report if not c.name.startswith("rel/quasinormal")]) == len(ck.RELATIONS)
    assert report.max_residual() <= 1e-12


def test_yb_equals_az(hat):
    yb = ck.word_product(hat, "YB")
    assert core_residual(yb, ck.word_product(hat, "AZ")) == 0.0
    assert not yb.is_zero
    assert ck.word_product(hat, "BA").is_zero


def test_quasinormal_y(hat):
    report = ck.check_relation_list(hat)
    assert report["rel/quasinormal/Y"].params["min_eigenvalue"] >= -1e-12


def test_relation_failure_is_reported(hat):
    swapped = dict(hat)
    swapped["A"], swapped["X"] = hat["X"], hat["A"]
    assert not ck.check_relation_list(swapped).ok


# Wold basis and action oracle


def test_wold_examples(hat):
    v, deg = ck.wold_basis(hat, (0, 0, 0))
    assert deg == (0, 0) and v[0] == 1
    v, deg = ck.wold_basis(hat, (1, 2, 0))
    p = hat["A"].params
    assert v[1 * 100 + 2 * 10 + 0] == 1 and np.count_nonzero(v) == 1
    assert deg == (2, 1)
    with pytest.raises(ParameterError):
        ck.wold_basis(hat, (1, 2, 3))
    assert p.core_max == 3


def test_wold_deeper_core():
    hat = hat_ops(13, 6)
    v, deg = ck.wold_basis(hat, (1, 2, 3))
    assert v[1 * 169 + 2 * 13 + 3] == 1 and np.count_nonzero(v) == 1
    assert deg == (5, 1)


def test_wold_orthonormal(hat):
    report = ck.check_wold(hat)
    assert report.ok
    assert report["wold/basis"].params["count"] == len(ck.wold_indices(3)) == 20


@pytest.mark.parametrize(
    "symbol, w, expected",
    [
        ("A", (1, 2, 3), ((1, 0), (1, 3, 3))),
        ("X*", (2, 1, 0), None),
        ("Y", (0, 2, 3), ((0, 1), (0, 3, 2))),
        ("Y", (1, 2, 3), None),
        ("Z", (0, 0, 2), ((0, 1), (0, 0, 2))),
        ("Z", (1, 0, 2), None),
        ("C*", (3, 0, 0), ((-1, 0), (3, 0, 0))),
        ("B*", (0, 0, 2), ((-1, 0), (0, 0, 1))),
        ("Y*", (0, 1, 1), ((0, -1), (0, 0, 2))),
    ],
)
def test_oracle_cases(symbol, w, expected):
    assert ck.action_oracle(symbol, w) == expected


def test_oracle_agrees_with_operators(hat):
    report = ck.check_action(hat)
    assert report.ok
    assert len(report) == 24
    assert report.max_residual() <= 1e-12


def test_oracle_disagreement_detected(hat):
    broken = dict(hat)
    broken["Y"] = hat["X"]
    assert not ck.check_action(broken).ok


def test_verify_all_deterministic():
    a = ck.verify_all().to_json()
    b = ck.verify_all().to_json()
    assert a == b
