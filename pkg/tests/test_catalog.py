import numpy as np
import pytest

from qgraph import catalog
from qgraph.fourier import fourier
from qgraph.graph import (complete_graph, is_biprojection, matrix_qset, range_closure_residual)


@pytest.mark.parametrize("name", catalog.names())
def test_registry_entry_verifies(name):
    item = catalog.load(name, verify=False)
    assert catalog.check_item(item) == []


def test_unknown_entry():
    with pytest.raises(KeyError):
        catalog.load("no-such-graph")


def test_walk_count_oracle():
    a = np.array([[0, 1], [1, 1]])
    assert catalog.walk_count(a, 1) == 3
    assert catalog.walk_count(a, 2) == 5


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exhaustive_binary_idempotents(n):
    res = catalog.exhaustive_binary_idempotents(n)
    assert res.total == 2 ** (n * n)
    assert res.ok and res.worst_residual < 1e-9


@pytest.mark.parametrize("q1", [1 / 2, 1 / 3])
def test_m2_family(q1):
    graphs = catalog.m2_family(q1)
    qs = graphs[0].qset
    for g in graphs:
        assert abs(g.idem_scalar - 1) < 1e-9
        f = g.flags
        assert f.self_adjoint and f.real and f.cp and f.reflexive
    k = complete_graph(qs).adjacency.matrix
    a4 = graphs[3].adjacency.matrix
    ratio = np.vdot(k, a4) / np.vdot(k, k)
    assert ratio.real > 0 and np.abs(a4 - ratio * k).max() < 1e-9


@pytest.mark.parametrize("q1", [1 / 2, 1 / 3])
def test_m2_preimages(q1):
    qs = matrix_qset([q1, 1 - q1])
    pre = catalog.m2_preimages(q1)
    a2 = pre["A2"]
    f2 = fourier(qs, a2.operator, require_bimodular=False).matrix
    assert np.abs(a2.printed_scalar * f2 - a2.target).max() < 1e-8
    a3 = pre["A3"]
    f3 = fourier(qs, a3.operator, require_bimodular=False).matrix
    # the printed operator lands on Â₃/δ
    assert abs(a3.fitted_scalar - qs.delta) < 1e-9
    assert np.abs(qs.delta * f3 - a3.target).max() < 1e-8


def test_c6_biprojections():
    qs = catalog.classical_graph(6, np.eye(6, dtype=int)).qset
    ranks = {"c": 3, "d": 2, "e": 1}
    scalars = {"c": 1 / 2, "d": 1 / 3, "e": 1 / 6}
    for name, p in catalog.c6_biprojections().items():
        rep = is_biprojection(qs, qs.operator(p))
        assert rep and rep.rank == ranks[name]
        assert abs(rep.schur_scalar - scalars[name]) < 1e-12
        assert range_closure_residual(qs, qs.operator(p)) < 1e-9


def test_classical_graph_validation():
    with pytest.raises(ValueError):
        catalog.classical_graph(2, np.array([[2, 0], [0, 1]]))
    with pytest.raises(ValueError):
        catalog.classical_graph(3, np.eye(2, dtype=int))
