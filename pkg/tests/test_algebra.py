import numpy as np
import pytest

from qgraph.algebra import (FaithfulnessError, ValidationError, delta_form_defect,
                            diagonal_state, gns, make_algebra, make_state, mult_map,
                            trace_state, watatani_index)
from qgraph.graph import DeltaFormError, quantum_set


def random_density(n, rng):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    w = x @ x.conj().T + 0.2 * np.eye(n)
    return w / np.trace(w).real


def test_matrix_units_multiply():
    alg = make_algebra([2, 1])
    for b in range(2):
        for a in range(2):
            for c in range(2):
                for d in range(2):
                    prod = alg.matrix_unit(0, a, b) @ alg.matrix_unit(0, c, d)
                    want = alg.matrix_unit(0, a, d) if b == c else alg.zero()
                    assert prod.allclose(want)
    cross = alg.matrix_unit(0, 0, 0) @ alg.matrix_unit(1, 0, 0)
    assert cross.allclose(alg.zero())


def test_unit_and_adjoint():
    alg = make_algebra([2, 3])
    rng = np.random.default_rng(1)
    x = alg.from_vector(rng.normal(size=alg.total_dim) + 1j * rng.normal(size=alg.total_dim))
    assert (alg.unit() @ x).allclose(x)
    assert x.adjoint().adjoint().allclose(x)
    y = alg.from_vector(rng.normal(size=alg.total_dim))
    assert (x @ y).adjoint().allclose(y.adjoint() @ x.adjoint())


def test_state_validation_names_block():
    alg = make_algebra([2, 1])
    with pytest.raises(ValidationError, match="block 0"):
        make_state(alg, [np.array([[0.5, 0.1], [0.0, 0.2]]), np.array([[0.3]])])
    with pytest.raises(FaithfulnessError, match="block 1"):
        make_state(alg, [np.diag([0.5, 0.5]), np.array([[0.0]])])
    with pytest.raises(ValidationError, match="total trace"):
        make_state(alg, [np.diag([0.5, 0.5]), np.array([[0.5]])])
    with pytest.raises(ValidationError, match="shape"):
        make_state(alg, [np.eye(3) / 3, np.array([[0.0]])])


def test_diagonal_gns_basis():
    q = np.array([0.2, 0.3, 0.5])
    alg, st = diagonal_state(q)
    space = gns(alg, st)
    k = 0
    for a in range(3):
        for b in range(3):
            want = alg.matrix_unit(0, a, b) * (q[b] ** -0.5)
            assert space.pp_basis[k].allclose(want)
            k += 1


def test_gram_is_identity_for_random_states():
    rng = np.random.default_rng(2)
    for dims in ([2], [3], [2, 1], [1, 1, 2]):
        alg = make_algebra(dims)
        weights = rng.random(len(dims)) + 0.1
        weights /= weights.sum()
        blocks = [p * random_density(n, rng) for p, n in zip(weights, dims)]
        space = gns(alg, make_state(alg, blocks))
        assert np.abs(space.gram() - np.eye(space.dim)).max() < 1e-12


def test_star_matrix():
    rng = np.random.default_rng(3)
    alg = make_algebra([2, 1])
    space = gns(alg, make_state(alg, [0.7 * random_density(2, rng), np.array([[0.3]])]))
    x = alg.from_vector(rng.normal(size=5) + 1j * rng.normal(size=5))
    lhs = space.coords(x.adjoint())
    rhs = space.star_matrix @ np.conj(space.coords(x))
    assert np.abs(lhs - rhs).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_single_block_delta_form(n):
    rng = np.random.default_rng(n)
    alg = make_algebra([n])
    for _ in range(5):
        w = random_density(n, rng)
        space = gns(alg, make_state(alg, [w]))
        m = mult_map(space).matrix
        target = np.trace(np.linalg.inv(w)).real
        assert np.linalg.norm(m @ m.conj().T - target * np.eye(space.dim)) / np.sqrt(space.dim) < 1e-9


def test_watatani_index_matches_block_index():
    alg, st = diagonal_state([0.25, 0.75])
    rep = watatani_index(gns(alg, st))
    assert rep.is_scalar
    assert abs(rep.scalar - (4 + 4 / 3)) < 1e-12


def test_non_delta_form_rejected_and_reported():
    alg = make_algebra([2, 1])
    st = make_state(alg, [np.diag([0.3, 0.3]), np.array([[0.4]])])
    dsq, res = delta_form_defect(gns(alg, st))
    assert res > 1e-3
    with pytest.raises(DeltaFormError):
        quantum_set(alg, st)
    qs = quantum_set(alg, st, require_delta_form=False)
    assert not qs.is_delta_form
    assert abs(qs.delta_sq - dsq) < 1e-12


def test_tracial_state_is_delta_form():
    alg = make_algebra([2, 1])
    st = trace_state(alg)
    assert st.is_delta_form_exact
    qs = quantum_set(alg, st)
    assert abs(qs.delta_sq - 5.0) < 1e-12
