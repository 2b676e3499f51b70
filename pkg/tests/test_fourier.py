import numpy as np
import pytest

from qgraph import catalog
from qgraph.fourier import (NotBimodularError, as_bimodular, bimodular_commutant,
                            commutant_adjoint, commutant_matrix_units, exchange_conventions,
                            fourier, fourier_matrix, fourier_of_identity_scalar,
                            idempotent_transport, inverse_fourier, projection_from_ranks,
                            verify_exchange)
from qgraph.graph import (classical_qset, density_qset, jones_projection, matrix_qset,
                          real_conjugate, tracial_qset)
from qgraph.linop import LinearOperator


def qsets():
    return [classical_qset(3), matrix_qset([1 / 3, 2 / 3]), matrix_qset(3), tracial_qset([2, 1])]


def hh(qs, mat):
    return LinearOperator(mat, ("H", "Hbar"), ("H", "Hbar"), qs.dim)


def random_bimodular(qs, rng):
    basis = bimodular_commutant(qs)
    c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    return sum(ci * b.matrix for ci, b in zip(c, basis))


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_identity_maps_to_delta_e(qs):
    f = fourier(qs, np.eye(qs.dim ** 2)).matrix
    assert np.abs(f - qs.delta * jones_projection(qs).matrix).max() < 1e-9
    assert abs(fourier_of_identity_scalar(qs) - qs.delta) < 1e-12


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_coev_projection_maps_to_identity(qs):
    du = qs.duality
    p = du.coev.matrix @ du.coev_dagger.matrix
    assert np.abs(fourier(qs, p).matrix - np.eye(qs.dim)).max() < 1e-10


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_commutant_dimension_and_methods_agree(qs):
    a = bimodular_commutant(qs, "product")
    assert len(a) == qs.dim ** 2
    assert fourier_matrix(qs).condition < 1e3
    if qs.dim > 5:
        return  # the direct solver works on d⁴ unknowns
    b = bimodular_commutant(qs, "direct")
    assert len(a) == len(b) == qs.dim ** 2
    va = np.column_stack([x.matrix.reshape(-1) for x in a])
    vb = np.column_stack([x.matrix.reshape(-1) for x in b])
    assert np.linalg.matrix_rank(np.hstack([va, vb]), tol=1e-8) == qs.dim ** 2


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_exchange_law(qs):
    rng = np.random.default_rng(7)
    conv = exchange_conventions(qs)
    assert abs(conv.schur_scalar - 1) < 1e-10
    assert abs(conv.dagger_scalar - 1) < 1e-10
    assert abs(conv.composition_scalar - 1 / qs.delta) < 1e-10
    assert conv.order == ("same" if qs.is_classical else "reversed")
    for _ in range(10):
        res = verify_exchange(qs, random_bimodular(qs, rng), random_bimodular(qs, rng))
        assert res.worst < 1e-10


def test_commutant_adjoint_is_involution():
    qs = matrix_qset([0.2, 0.3, 0.5])
    rng = np.random.default_rng(3)
    t = hh(qs, random_bimodular(qs, rng))
    back = commutant_adjoint(qs, commutant_adjoint(qs, t))
    assert np.abs(back.matrix - t.matrix).max() < 1e-10
    lhs = fourier(qs, commutant_adjoint(qs, t)).matrix
    rhs = real_conjugate(qs, fourier(qs, t)).matrix
    assert np.abs(lhs - rhs).max() < 1e-10


def test_rejects_non_bimodular():
    qs = matrix_qset(2)
    rng = np.random.default_rng(0)
    t = rng.normal(size=(16, 16))
    with pytest.raises(NotBimodularError) as info:
        fourier(qs, t)
    assert info.value.residual > 1e-3
    with pytest.raises(NotBimodularError):
        as_bimodular(qs, t)


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_inverse_round_trip(qs):
    rng = np.random.default_rng(11)
    s = rng.normal(size=(qs.dim, qs.dim)) + 1j * rng.normal(size=(qs.dim, qs.dim))
    inv = inverse_fourier(qs, s)
    assert inv.residual < 1e-9
    assert np.abs(fourier(qs, inv).matrix - s).max() < 1e-10


@pytest.mark.parametrize("weights", [[0.5, 0.5], [1 / 3, 2 / 3], [0.2, 0.3, 0.5], [1 / 3] * 3])
def test_classical_oracle(weights):
    qs = classical_qset(weights, require_delta_form=False)
    rng = np.random.default_rng(5)
    for _ in range(3):
        t = random_bimodular(qs, rng)
        f = fourier(qs, hh(qs, t)).matrix
        assert np.abs(f - catalog.cn_fourier_oracle(weights, t)).max() < 1e-10


@pytest.mark.parametrize("weights", [[0.5, 0.5], [1 / 3, 2 / 3], [1 / 3] * 3, [0.2, 0.3, 0.5]])
def test_matrix_oracle(weights):
    qs = matrix_qset(weights)
    rng = np.random.default_rng(6)
    for _ in range(3):
        t = random_bimodular(qs, rng)
        f = fourier(qs, hh(qs, t)).matrix
        assert np.abs(f - catalog.mn_fourier_oracle(weights, t)).max() < 1e-10


def test_commutant_matrix_units():
    qs = density_qset([2, 1], [np.array([[0.4, 0.1], [0.1, 0.2]]), np.array([[0.4]])],
                      require_delta_form=False)
    units = commutant_matrix_units(qs)
    for (i, j), block in units.items():
        for (a, c, b, d), e in block.items():
            adj = commutant_adjoint(qs, hh(qs, e)).matrix
            assert np.abs(adj - block[b, d, a, c]).max() < 1e-10
            for (a2, c2, b2, d2), f in list(block.items())[:4]:
                want = block[a, c, b2, d2] if (b, d) == (a2, c2) else 0
                assert np.abs(e @ f - want).max() < 1e-10


@pytest.mark.parametrize("qs", qsets(), ids=repr)
def test_transported_projections_are_real_cp_graphs(qs):
    dims = qs.algebra.block_dims
    rng = np.random.default_rng(2)
    for seed in range(3):
        ranks = [[int(rng.integers(0, ni * nj + 1)) for nj in dims] for ni in dims]
        if not np.any(ranks):
            ranks[0][0] = 1
        g = idempotent_transport(qs, ranks, seed=seed, product="normalized")
        # F(P) ⋆ F(P) = δ F(P ∘ P) for the raw product
        assert abs(g.idem_scalar - 1 / qs.delta) < 1e-9
        assert g.flags.real and g.flags.cp


def test_transported_projection_rank():
    qs = matrix_qset([0.25, 0.75])
    p = projection_from_ranks(qs, [[3]], seed=1)
    assert np.linalg.matrix_rank(p.matrix, tol=1e-8) == 3 * 4


def test_non_delta_form_commutant_still_works():
    w = [np.diag([0.3, 0.3]), np.array([[0.4]])]
    qs = density_qset([2, 1], w, require_delta_form=False)
    assert len(bimodular_commutant(qs)) == 25
    rng = np.random.default_rng(4)
    s = hh(qs, random_bimodular(qs, rng))
    assert np.abs(fourier(qs, inverse_fourier(qs, fourier(qs, s))).matrix
                  - fourier(qs, s).matrix).max() < 1e-9
