import numpy as np
import pytest

from qgraph.algebra import ValidationError
from qgraph.groups import (GroupAlgebraElement, averaging_idempotent, cayley_adjacency,
                           central_idempotents, character_idempotent, characters, convolution_operator,
                           convolve, cyclic, direct_product, from_table, group_algebra_qset,
                           is_convolution_idempotent, point_mass, point_mass_star_table,
                           quantum_cayley_graph, symmetric3)


def circulant_oracle(n, subset):
    a = np.zeros((n, n), dtype=np.int64)
    for col in range(n):
        for s in subset:
            a[(col + s) % n, col] = 1
    return a


def test_table_validation():
    with pytest.raises(ValidationError, match="permutation"):
        from_table([[0, 1], [1, 1]])
    with pytest.raises(ValidationError, match="identity"):
        from_table([[0, 2, 1], [2, 1, 0], [1, 0, 2]])
    # a Latin square with identity 0 that is not associative
    bad = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(ValidationError, match="associativity"):
        from_table(bad)


def test_cyclic_basics():
    g = cyclic(6)
    assert g.order == 6 and g.identity == 0 and g.is_abelian
    assert [g.element_order(k) for k in range(6)] == [1, 6, 3, 2, 3, 6]
    assert all(g.mul(k, int(g.inverse[k])) == 0 for k in range(6))


def test_symmetric3_structure():
    g = symmetric3()
    assert g.order == 6 and not g.is_abelian
    assert sorted(len(c) for c in g.conjugacy_classes()) == [1, 2, 3]
    assert [r.shape[1] for r in g.irreps] == [1, 1, 2]


def test_direct_product():
    g = direct_product(cyclic(2), cyclic(3))
    assert g.order == 6 and g.is_abelian
    assert max(g.element_order(k) for k in range(6)) == 6


@pytest.mark.parametrize("group", [symmetric3(), cyclic(5), direct_product(cyclic(2), cyclic(2))],
                         ids=["S3", "Z5", "Z2xZ2"])
def test_point_mass_star_table(group):
    rep = point_mass_star_table(group)
    assert rep.ok and rep.checked == group.order ** 2


@pytest.mark.parametrize("n", range(1, 9))
def test_cayley_matches_circulant(n):
    g = cyclic(n)
    rng = np.random.default_rng(n)
    for _ in range(4):
        k = int(rng.integers(1, n + 1))
        subset = sorted(rng.choice(n, size=k, replace=False).tolist())
        assert np.array_equal(cayley_adjacency(g, subset), circulant_oracle(n, subset))


def test_cayley_rejects_bad_subsets():
    with pytest.raises(ValidationError):
        cayley_adjacency(cyclic(3), [])
    with pytest.raises(ValidationError):
        cayley_adjacency(cyclic(3), [3])


def test_characters_of_cyclic():
    n = 5
    chars = characters(cyclic(n))
    assert np.abs(chars[0] - 1).max() < 1e-12
    gram = chars @ chars.conj().T / n
    assert np.abs(gram - np.eye(n)).max() < 1e-12
    for chi in chars:
        assert is_convolution_idempotent(character_idempotent(cyclic(n), chi))


def test_convolution_and_averaging():
    g = symmetric3()
    a, b = point_mass(g, 1), point_mass(g, 2)
    assert convolve(a, b) == point_mass(g, g.mul(1, 2))
    avg = averaging_idempotent(g)
    assert is_convolution_idempotent(avg)
    total = sum(central_idempotents(g)[1:], central_idempotents(g)[0])
    assert np.abs(total.coeffs - point_mass(g, g.identity).coeffs).max() < 1e-12


def test_group_algebra_qset_s3():
    ga = group_algebra_qset(symmetric3())
    assert ga.qset.algebra.block_dims == (1, 1, 2)
    assert abs(ga.qset.delta_sq - 6) < 1e-12
    basis = ga.group_basis
    assert np.abs(basis.conj().T @ basis - np.eye(6)).max() < 1e-12


def test_quantum_cayley_in_group_basis_is_convolution():
    g = symmetric3()
    ga = group_algebra_qset(g)
    for p in central_idempotents(g):
        qg = quantum_cayley_graph(ga, p)
        b = ga.group_basis
        in_group_basis = b.conj().T @ qg.adjacency.matrix @ b
        assert np.abs(in_group_basis - convolution_operator(g, p)).max() < 1e-10
        assert abs(qg.idem_scalar - 1) < 1e-9


def test_dual_cayley_graph_is_diagonal():
    g = cyclic(4)
    ga = group_algebra_qset(g)
    chars = characters(g)
    for subset in ([0], [1, 3], [0, 2], [1, 2, 3]):
        p = GroupAlgebraElement(g, np.zeros(4))
        for s in subset:
            p = p + character_idempotent(g, chars[s])
        qg = quantum_cayley_graph(ga, p)
        want = np.zeros(4)
        want[subset] = 1
        assert np.abs(qg.adjacency.matrix - np.diag(want)).max() < 1e-9


def test_quantum_cayley_rejects_non_idempotent():
    g = cyclic(3)
    with pytest.raises(ValidationError):
        quantum_cayley_graph(g, point_mass(g, 1))
