import numpy as np
import pytest

from qgraph import catalog
from qgraph.graph import (DegenerateInputError, NotAdjacencyError, choi_matrix, classical_qset,
                          complete_graph, edge_count, edge_projector, is_biprojection,
                          jones_projection, make_graph, matrix_qset, path_space_projector,
                          range_closure_residual, real_conjugate, schur, schur_normalized,
                          tracial_qset, trivial_graph, vertex_count)


def test_uniform_classical_schur_is_entrywise():
    qs = classical_qset(3)
    rng = np.random.default_rng(0)
    s, t = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    got = schur_normalized(qs, qs.operator(s), qs.operator(t)).matrix
    assert np.abs(got - catalog.entrywise_schur(s, t)).max() < 1e-12
    raw = schur(qs, qs.operator(s), qs.operator(t)).matrix
    assert np.abs(raw - qs.delta_sq * got).max() < 1e-12


def test_jones_projection_classical_oracle():
    q = [0.2, 0.3, 0.5]
    qs = classical_qset(q, require_delta_form=False)
    e = jones_projection(qs).matrix
    assert np.abs(e - catalog.classical_jones_oracle(q)).max() < 1e-12


def test_weighted_classical_graph():
    q = [1 / 6, 1 / 3, 1 / 2]
    a = np.array([[1, 0, 1], [1, 1, 0], [0, 0, 1]])
    g = catalog.classical_graph(q, a)
    assert abs(g.idem_scalar - 1.0) < 1e-9
    # off the uniform weights each edge counts with weight δ⁴ q_i q_j
    dsq = g.qset.delta_sq
    assert abs(edge_count(g) - dsq ** 2 * np.einsum("i,ij,j", q, a, q)) < 1e-9


def test_complete_and_trivial():
    for qs in (classical_qset(3), matrix_qset([0.25, 0.75]), tracial_qset([2, 1])):
        k = complete_graph(qs)
        assert abs(k.idem_scalar - 1.0) < 1e-9
        assert k.flags.reflexive and k.flags.self_adjoint and k.flags.real and k.flags.cp
        t = trivial_graph(qs)
        assert t.flags.reflexive
        assert abs(edge_count(t) - vertex_count(qs)) < 1e-9
        assert abs(edge_count(k) - qs.delta_sq ** 2) < 1e-9


def test_rejects_non_idempotent():
    qs = classical_qset(2)
    with pytest.raises(NotAdjacencyError) as info:
        make_graph(qs, np.array([[2.0, 0], [0, 1]]))
    assert info.value.residual > 0.1
    with pytest.raises(DegenerateInputError):
        make_graph(qs, np.zeros((2, 2)))


def test_real_conjugate_is_involution():
    qs = matrix_qset([0.3, 0.7])
    rng = np.random.default_rng(1)
    t = qs.operator(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    back = real_conjugate(qs, real_conjugate(qs, t))
    assert np.abs(back.matrix - t.matrix).max() < 1e-12


def test_choi_of_identity_is_positive():
    qs = tracial_qset([2, 1])
    c = choi_matrix(qs, qs.identity)
    assert np.linalg.eigvalsh((c + c.conj().T) / 2).min() > -1e-12


def test_irreflexive_flag():
    g = catalog.classical_graph(3, np.ones((3, 3)) - np.eye(3))
    assert g.flags.irreflexive


def test_directed_edge_is_real_not_self_adjoint():
    g = catalog.classical_graph(2, np.array([[0, 1], [0, 0]]))
    assert not g.flags.self_adjoint
    assert g.flags.real and g.flags.cp


def test_edge_and_path_projectors():
    cases = [np.array([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]]),
             np.array([[1, 1], [0, 1]]), np.ones((3, 3), dtype=int)]
    for a in cases:
        g = catalog.classical_graph(a.shape[0], a)
        assert edge_projector(g).rank == a.sum()
        assert path_space_projector(g, 2).rank == catalog.walk_count(a, 2)
        assert path_space_projector(g, 3).rank == catalog.walk_count(a, 3)


def test_biprojection_of_complete_graph():
    qs = classical_qset(4)
    e = jones_projection(qs)
    rep = is_biprojection(qs, e)
    assert rep and rep.rank == 1
    assert range_closure_residual(qs, e) < 1e-12


def test_non_biprojection():
    qs = classical_qset(3)
    p = np.zeros((3, 3))
    p[0, 0] = 1
    rep = is_biprojection(qs, p)
    assert rep and rep.rank == 1
    half = np.full((3, 3), 1 / 3)
    half[0, 1] = half[1, 0] = 0.0
    assert not is_biprojection(qs, half)


def test_path_space_can_be_empty():
    g = catalog.classical_graph(2, np.array([[0, 1], [0, 0]]))
    assert edge_projector(g).rank == 1
    assert path_space_projector(g, 2).rank == 0
    assert path_space_projector(g, 3).rank == 0
