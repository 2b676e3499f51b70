import numpy as np
import pytest

from qgraph.algebra import diagonal_state, gns, make_algebra, make_state
from qgraph.graph import classical_qset, matrix_qset
from qgraph.linop import (ConjugationMap, LinearOperator, commutant_basis, ev_coev, identity,
                          left_action, numerical_rank, right_action, span_projector)


def test_leg_bookkeeping():
    a = LinearOperator(np.arange(4.0).reshape(2, 2))
    assert a.leg_dim == 2 and a.domain == ("H",)
    b = LinearOperator(np.ones((4, 4)), ("H", "Hbar"), ("H", "Hbar"))
    assert b.leg_dim == 2
    with pytest.raises(TypeError):
        a @ b
    with pytest.raises(TypeError):
        a + identity(2, ("Hbar",))
    with pytest.raises(ValueError):
        LinearOperator(np.ones((3, 4)), ("H", "H"), ("H",))
    with pytest.raises(ValueError):
        LinearOperator(np.eye(2), ("X",), ("H",))


def test_tensor_and_dagger():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    y = rng.normal(size=(2, 2))
    a, b = LinearOperator(x), LinearOperator(y, ("Hbar",), ("Hbar",))
    ab = a.tensor(b)
    assert ab.domain == ("H", "Hbar")
    assert np.abs(ab.matrix - np.kron(x, y)).max() < 1e-15
    assert np.abs(ab.dagger().matrix - np.kron(x, y).conj().T).max() < 1e-15
    assert np.abs((a @ a.dagger()).matrix - x @ x.conj().T).max() < 1e-15


def test_matrix_is_read_only():
    a = LinearOperator(np.eye(2))
    with pytest.raises(ValueError):
        a.matrix[0, 0] = 5


def test_numerical_rank():
    m = np.diag([1.0, 1e-3, 1e-12])
    assert numerical_rank(m) == 2
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_module_actions_commute():
    rng = np.random.default_rng(1)
    qs = matrix_qset([0.3, 0.7])
    alg = qs.algebra
    for _ in range(3):
        x = alg.from_vector(rng.normal(size=4) + 1j * rng.normal(size=4))
        y = alg.from_vector(rng.normal(size=4) + 1j * rng.normal(size=4))
        lx, ry = left_action(qs.gns, x), right_action(qs.gns, y)
        assert np.abs((lx @ ry).matrix - (ry @ lx).matrix).max() < 1e-12
        lxy = left_action(qs.gns, x @ y)
        assert np.abs(lxy.matrix - (lx @ left_action(qs.gns, y)).matrix).max() < 1e-12


def test_conjugation_is_antilinear():
    c = ConjugationMap(3)
    v = np.array([1 + 2j, 3j, -1])
    assert np.abs(c(2j * v) - (-2j) * c(v)).max() < 1e-15
    op = LinearOperator(np.eye(3) * 1j)
    bar = c.bar(op)
    assert bar.domain == ("Hbar",)
    assert np.abs(bar.matrix + 1j * np.eye(3)).max() < 1e-15


def test_commutant_dimensions():
    # left and right actions of C^3 leave only the diagonal
    qs = classical_qset(3)
    ops = [left_action(qs.gns, u) for u in qs.gns.pp_basis]
    ops += [right_action(qs.gns, u) for u in qs.gns.pp_basis]
    assert len(commutant_basis(ops)) == 3
    assert len(commutant_basis([], dim=3)) == 9
    # the left action of M_2 commutes exactly with the right actions
    mq = matrix_qset(2)
    basis = commutant_basis([left_action(mq.gns, u) for u in mq.gns.pp_basis])
    assert len(basis) == 4
    proj = span_projector(basis)
    for u in mq.gns.pp_basis:
        v = right_action(mq.gns, u).matrix.reshape(-1)
        assert np.linalg.norm(proj @ v - v) < 1e-10


@pytest.mark.parametrize("dims,weights", [([2], [0.3, 0.7]), ([1, 1, 1], [0.2, 0.3, 0.5]),
                                          ([2, 1], None)])
def test_zigzag_and_loops(dims, weights):
    alg = make_algebra(dims)
    if weights is None:
        rng = np.random.default_rng(4)
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        w = x @ x.conj().T + np.eye(2)
        blocks = [0.6 * w / np.trace(w).real, np.array([[0.4]])]
    elif len(dims) == 1:
        alg, st = diagonal_state(weights)
        blocks = st.density_blocks
    else:
        blocks = [np.array([[q]]) for q in weights]
    space = gns(alg, make_state(alg, blocks))
    du = ev_coev(space)
    assert max(du.zigzag_residuals) < 1e-12
    dsq = space.state.delta_sq
    assert abs(du.ev_loop - dsq ** 0.5) < 1e-12
    s, res = du.coev_loop()
    if space.state.is_delta_form_exact:
        assert abs(s - dsq ** 0.5) < 1e-12 and res < 1e-12
    else:
        # the index element is not central-scalar, so coev† coev is not a multiple of id
        assert res > 1e-6
