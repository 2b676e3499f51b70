"""The quantum Fourier transform between the bimodular commutant on ``H⊗Hbar`` and ``End(H)``."""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .algebra import AlgebraElement
from .graph import (QuantumGraph, QuantumSet, jones_projection, make_graph, real_conjugate,
                    schur)
from .linop import (LinearOperator, commutant_basis, conjugate_right_action, left_action,
                    right_action)

LEGS = ("H", "Hbar")


class NotBimodularError(ValueError):
    """Operator is not in the B-B commutant on ``H⊗Hbar``."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class FourierSolveError(ArithmeticError):
    """The Fourier matrix on the commutant basis is too ill-conditioned to invert."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True, eq=False)
class BimodularOperator:
    """An operator on ``H⊗Hbar`` with its bimodularity residual."""

    qset: QuantumSet
    operator: LinearOperator
    residual: float

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    def dagger(self) -> "BimodularOperator":
        """Adjoint for the commutant's own inner product (see :func:`commutant_adjoint`)."""
        return BimodularOperator(self.qset, commutant_adjoint(self.qset, self.operator),
                                 self.residual)

    def __matmul__(self, other: "BimodularOperator") -> "BimodularOperator":
        op = self.operator @ other.operator
        return BimodularOperator(self.qset, op, bimodularity_residual(self.qset, op))

    def __add__(self, other: "BimodularOperator") -> "BimodularOperator":
        return BimodularOperator(self.qset, self.operator + other.operator,
                                 max(self.residual, other.residual))

    def __mul__(self, scalar) -> "BimodularOperator":
        return BimodularOperator(self.qset, self.operator * scalar, self.residual)

    __rmul__ = __mul__


def _hh_operator(qset: QuantumSet, matrix) -> LinearOperator:
    return LinearOperator(np.asarray(matrix, dtype=complex), LEGS, LEGS, qset.dim)


def _generators(qset: QuantumSet) -> list[tuple[np.ndarray, np.ndarray]]:
    d = qset.dim
    eye = np.eye(d)
    out = []
    for u in qset.algebra.matrix_units():
        lm = left_action(qset.gns, u).matrix
        out.append((np.kron(lm, eye), np.kron(eye, lm.T)))
    return out


def bimodularity_residual(qset: QuantumSet, t) -> float:
    """Largest relative commutator with ``L_b ⊗ 1`` and ``1 ⊗ L_b^T`` over matrix units ``b``."""
    mat = t.matrix if hasattr(t, "matrix") else np.asarray(t)
    scale = max(1.0, float(np.linalg.norm(mat)))
    worst = 0.0
    for left, right in _generators(qset):
        for g in (left, right):
            worst = max(worst, float(np.linalg.norm(mat @ g - g @ mat)))
    return worst / scale


def as_bimodular(qset: QuantumSet, t, tol: float | None = None) -> BimodularOperator:
    tol = 1e-8 if tol is None else tol
    op = t if isinstance(t, LinearOperator) else _hh_operator(qset, t)
    res = bimodularity_residual(qset, op)
    if res > tol:
        raise NotBimodularError(f"operator is not B-B bimodular (residual {res:.3e})", res)
    return BimodularOperator(qset, op, res)


def left_metric(qset: QuantumSet) -> np.ndarray:
    """Gram matrix ``ω(u_l u_k*)`` of the basis for the inner product ``⟨ξ|η⟩' = ω(ηξ*)``."""
    g = qset.gns
    basis = g.pp_basis
    return np.array([[g.state(b @ a.adjoint()) for b in basis] for a in basis])


def commutant_metric(qset: QuantumSet) -> np.ndarray:
    """Metric on ``H⊗Hbar``: ``ω(ηξ*)`` on the first leg and the GNS product on the second."""
    store = _cache(qset)
    if "metric" not in store:
        m = np.kron(left_metric(qset), np.eye(qset.dim))
        with _CACHE_LOCK:
            store["metric"] = m
    return store["metric"]


def commutant_adjoint(qset: QuantumSet, t) -> LinearOperator:
    """``T‡ = M⁻¹ T† M``, with ``(R_x ⊗ R_y^T)‡ = R_{x*} ⊗ (R_y^T)†``.

    This is the involution under which F₂ intertwines adjoints with the real
    structure ``T ↦ T(·*)*``; it reduces to the plain adjoint for tracial states.
    """
    op = t if isinstance(t, LinearOperator) else _hh_operator(qset, t)
    m = commutant_metric(qset)
    return op.with_matrix(np.linalg.solve(m, op.matrix.conj().T @ m))


def twisted_right_action(qset: QuantumSet, y: AlgebraElement) -> np.ndarray:
    """``ξ ↦ ξ W^{1/2} y W^{-1/2}``: a *-anti-representation commuting with the left action."""
    roots, inv_roots = [], []
    for w in qset.state.density_blocks:
        vals, vecs = np.linalg.eigh(w)
        roots.append((vecs * np.sqrt(vals)) @ vecs.conj().T)
        inv_roots.append((vecs / np.sqrt(vals)) @ vecs.conj().T)
    alg = qset.algebra
    twisted = alg.from_blocks(roots) @ y @ alg.from_blocks(inv_roots)
    return right_action(qset.gns, twisted).matrix


# -- commutant ---------------------------------------------------------------------

_CACHE: "weakref.WeakKeyDictionary[QuantumSet, dict]" = weakref.WeakKeyDictionary()
_CACHE_LOCK = threading.Lock()


def _cache(qset: QuantumSet) -> dict:
    with _CACHE_LOCK:
        return _CACHE.setdefault(qset, {})


def bimodular_commutant(qset: QuantumSet, method: str = "product") -> list[BimodularOperator]:
    """Orthonormal basis of ``End_{B-B}(H⊗Hbar)``.

    ``method="product"`` tensors the one-sided commutants of the left action on
    ``H`` and the conjugated right action on ``Hbar``; ``method="direct"`` runs the
    SVD solver on the full ``d²``-dimensional space.
    """
    store = _cache(qset)
    key = ("commutant", method)
    if key in store:
        return store[key]
    gns = qset.gns
    units = qset.algebra.matrix_units()
    if method == "product":
        left = commutant_basis([left_action(gns, u) for u in units], tol=qset.tol.commutant)
        right = commutant_basis([conjugate_right_action(gns, u) for u in units],
                                tol=qset.tol.commutant)
        mats = [np.kron(a.matrix, b.matrix) for a in left for b in right]
    elif method == "direct":
        ops = []
        for lo, ro in _generators(qset):
            ops.append(_hh_operator(qset, lo))
            ops.append(_hh_operator(qset, ro))
        mats = [b.matrix for b in commutant_basis(ops, tol=qset.tol.commutant)]
    else:
        raise ValueError(f"unknown commutant method {method!r}")
    basis = [BimodularOperator(qset, _hh_operator(qset, m), 0.0) for m in mats]
    with _CACHE_LOCK:
        store[key] = basis
    return basis


def commutant_matrix_units(qset: QuantumSet) -> dict:
    """Matrix units of the commutant, grouped by block pair ``(i, j)``.

    The block ``(i, j)`` is ``M_{n_i} ⊗ M_{n_j}``; entry ``(a, c, b, d)`` is
    ``R(e^i_{ba}) ⊗ ρ(e^j_{cd})^T`` with ``R`` the right action and ``ρ`` the
    twisted one. They are ‡-matrix units for :func:`commutant_adjoint`.
    """
    alg = qset.algebra
    right, rho = {}, {}
    for i, n in enumerate(alg.block_dims):
        for a in range(n):
            for b in range(n):
                unit = alg.matrix_unit(i, a, b)
                right[i, a, b] = right_action(qset.gns, unit).matrix
                rho[i, a, b] = twisted_right_action(qset, unit)
    units = {}
    dims = alg.block_dims
    for i, ni in enumerate(dims):
        for j, nj in enumerate(dims):
            units[i, j] = {(a, c, b, d): np.kron(right[i, b, a], rho[j, c, d].T)
                           for a in range(ni) for b in range(ni)
                           for c in range(nj) for d in range(nj)}
    return units


def commutant_element(qset: QuantumSet, blocks: Mapping[tuple[int, int], np.ndarray]
                      ) -> BimodularOperator:
    """Embed block matrices ``Z_ij ∈ M_{n_i n_j}`` into the commutant."""
    units = commutant_matrix_units(qset)
    d = qset.dim
    total = np.zeros((d * d, d * d), dtype=complex)
    dims = qset.algebra.block_dims
    for (i, j), z in blocks.items():
        ni, nj = dims[i], dims[j]
        z = np.asarray(z, dtype=complex)
        if z.shape != (ni * nj, ni * nj):
            raise ValueError(f"block {(i, j)} must be {ni * nj}x{ni * nj}, got {z.shape}")
        for (a, c, b, dd), mu in units[i, j].items():
            coeff = z[a * nj + c, b * nj + dd]
            if coeff != 0:
                total += coeff * mu
    op = _hh_operator(qset, total)
    return BimodularOperator(qset, op, bimodularity_residual(qset, op))


# -- the transform -------------------------------------------------------------------

def fourier_generic(qset: QuantumSet, t) -> LinearOperator:
    """``δ · T(|Ω⟩⟨Ω|)`` read as an operator on ``H``; the rotation of ``T`` by ``ev†``."""
    mat = t.matrix if hasattr(t, "matrix") else np.asarray(t)
    om = qset.omega
    d = qset.dim
    out = qset.delta * (mat @ np.kron(om, om.conj())).reshape(d, d)
    return LinearOperator(out, leg_dim=d)


def _diagonal_family(qset: QuantumSet) -> list[tuple[int, float]]:
    """Indices of diagonal basis vectors ``u_ii`` with weights ``q_i`` (``Σ q_i u_ii* u_ii = 1``)."""
    out, pos = [], 0
    for n, w in zip(qset.algebra.block_dims, qset.state.density_blocks):
        if np.linalg.norm(w - np.diag(np.diag(w))) > qset.tol.eq:
            raise ValueError("basis-level contraction needs diagonal density blocks")
        for i in range(n):
            out.append((pos + i * n + i, float(w[i, i].real)))
        pos += n * n
    return out


def fourier_contraction(qset: QuantumSet, t) -> LinearOperator:
    """Rotation evaluated on the representative ``ev†(1) = δ Σ q_i ū_ii ⊠ u_ii``.

    Agrees with :func:`fourier_generic` on bimodular operators; on arbitrary
    operators on ``H⊗Hbar`` it depends on this choice of representative.
    """
    mat = t.matrix if hasattr(t, "matrix") else np.asarray(t)
    d = qset.dim
    t4 = mat.reshape(d, d, d, d)
    om_bar = qset.omega.conj()
    x = np.einsum("lcia,a->lci", t4, om_bar)
    basis = qset.gns.pp_basis
    out = np.zeros((d, d), dtype=complex)
    for i, w in _diagonal_family(qset):
        ui_star = basis[i].adjoint()
        for ell in range(d):
            coeff = x[ell, :, i]
            if np.any(coeff):
                out += w * np.outer(qset.gns.coords(ui_star @ basis[ell]), coeff)
    return LinearOperator(qset.delta * out, leg_dim=d)


def fourier(qset: QuantumSet, t, require_bimodular: bool = True,
            tol: float | None = None) -> LinearOperator:
    """``F₂(T)``.

    Bimodular inputs use the representative-free rotation. With
    ``require_bimodular=False`` non-bimodular inputs are accepted and evaluated
    with :func:`fourier_contraction`.
    """
    tol = 1e-8 if tol is None else tol
    if isinstance(t, BimodularOperator):
        res = t.residual
        t = t.operator
    else:
        res = bimodularity_residual(qset, t)
    if res <= tol:
        return fourier_generic(qset, t)
    if require_bimodular:
        raise NotBimodularError(f"F₂ is defined on the commutant only (residual {res:.3e})", res)
    return fourier_contraction(qset, t)


@dataclass(frozen=True)
class FourierMatrix:
    matrix: np.ndarray
    inverse: np.ndarray
    condition: float


def fourier_matrix(qset: QuantumSet) -> FourierMatrix:
    """Matrix of F₂ from commutant-basis coefficients to ``vec(End H)``."""
    store = _cache(qset)
    if "fourier_matrix" in store:
        return store["fourier_matrix"]
    basis = bimodular_commutant(qset)
    mat = np.column_stack([fourier_generic(qset, b.operator).matrix.reshape(-1) for b in basis])
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > 1e12:
        raise FourierSolveError(f"F₂ matrix on the commutant is singular (cond {cond:.3e})", cond)
    fm = FourierMatrix(mat, np.linalg.inv(mat), cond)
    with _CACHE_LOCK:
        store["fourier_matrix"] = fm
    return fm


def inverse_fourier(qset: QuantumSet, s) -> BimodularOperator:
    """The commutant element ``Š`` with ``F₂(Š) = S``."""
    mat = s.matrix if hasattr(s, "matrix") else np.asarray(s)
    fm = fourier_matrix(qset)
    coeffs = fm.inverse @ mat.reshape(-1)
    basis = bimodular_commutant(qset)
    out = sum((c * b.matrix for c, b in zip(coeffs, basis)), np.zeros_like(basis[0].matrix))
    op = _hh_operator(qset, out)
    return BimodularOperator(qset, op, bimodularity_residual(qset, op))


# -- products and the exchange law ------------------------------------------------------

def commutant_schur(qset: QuantumSet, s, t) -> BimodularOperator:
    """Schur product on ``H⊗Hbar``: ``|x⟩⟨y| ↦ δ S(|x⟩⟨Ω|) T(|Ω⟩⟨y|)``."""
    sm = s.matrix if hasattr(s, "matrix") else np.asarray(s)
    tm = t.matrix if hasattr(t, "matrix") else np.asarray(t)
    d = qset.dim
    om = qset.omega
    eye = np.eye(d)
    left = sm @ np.kron(eye, om.conj()[:, None])   # columns: vec(S(|x⟩⟨Ω|)) for x = e_p
    right = tm @ np.kron(om[:, None], eye)          # columns: vec(T(|Ω⟩⟨y|)) for y = e_r
    left = left.reshape(d, d, d)    # [row, col, p]
    right = right.reshape(d, d, d)  # [row, col, r]
    prod = np.einsum("akp,kbr->abpr", left, right).reshape(d * d, d * d)
    op = _hh_operator(qset, qset.delta * prod)
    return BimodularOperator(qset, op, bimodularity_residual(qset, op))


@dataclass(frozen=True)
class ExchangeConventions:
    """Per-quantum-set scalars relating the two sides of the exchange law.

    ``F(S∘T) = composition_scalar · F(A) ⋆ F(B)`` with ``(A, B) = (S, T)`` when
    ``order == "same"`` and ``(T, S)`` when ``order == "reversed"``.
    """

    composition_scalar: complex
    order: str
    dagger_scalar: complex
    schur_scalar: complex


@dataclass(frozen=True)
class ExchangeResiduals:
    schur_to_composition: float
    composition_to_schur: float
    dagger_to_star: float
    conventions: ExchangeConventions

    @property
    def worst(self) -> float:
        return max(self.schur_to_composition, self.composition_to_schur, self.dagger_to_star)


def _fit(target: np.ndarray, model: np.ndarray) -> tuple[complex, float]:
    denom = np.vdot(model, model)
    if denom == 0:
        return 0j, float(np.linalg.norm(target))
    c = np.vdot(model, target) / denom
    return complex(c), float(np.linalg.norm(target - c * model))


def _rel(res: float, target: np.ndarray) -> float:
    return res / max(1.0, float(np.linalg.norm(target)))


def _random_commutant(qset: QuantumSet, rng: np.random.Generator) -> BimodularOperator:
    basis = bimodular_commutant(qset)
    coeffs = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    mat = sum(c * b.matrix for c, b in zip(coeffs, basis))
    return BimodularOperator(qset, _hh_operator(qset, mat), 0.0)


def exchange_conventions(qset: QuantumSet, seed: int = 0) -> ExchangeConventions:
    """Detect and cache the exchange-law scalars from one seeded random pair."""
    store = _cache(qset)
    if "exchange" in store:
        return store["exchange"]
    rng = np.random.default_rng(seed)
    s, t = _random_commutant(qset, rng), _random_commutant(qset, rng)
    fs, ft = fourier(qset, s), fourier(qset, t)
    target = fourier(qset, s.operator @ t.operator).matrix
    same = _fit(target, schur(qset, fs, ft).matrix)
    rev = _fit(target, schur(qset, ft, fs).matrix)
    scalar, order = (same[0], "same") if same[1] <= rev[1] else (rev[0], "reversed")
    dag_scalar, _ = _fit(fourier(qset, t.dagger()).matrix, real_conjugate(qset, ft).matrix)
    sch_scalar, _ = _fit(fourier(qset, commutant_schur(qset, s, t)).matrix, (fs @ ft).matrix)
    conv = ExchangeConventions(scalar, order, dag_scalar, sch_scalar)
    with _CACHE_LOCK:
        store["exchange"] = conv
    return conv


def verify_exchange(qset: QuantumSet, s, t) -> ExchangeResiduals:
    """Relative residuals of the three exchange identities under the recorded scalars."""
    conv = exchange_conventions(qset)
    s = s if isinstance(s, BimodularOperator) else as_bimodular(qset, s)
    t = t if isinstance(t, BimodularOperator) else as_bimodular(qset, t)
    fs, ft = fourier(qset, s), fourier(qset, t)

    lhs = fourier(qset, commutant_schur(qset, s, t)).matrix
    r1 = _rel(np.linalg.norm(lhs - conv.schur_scalar * (fs @ ft).matrix), lhs)

    lhs = fourier(qset, s.operator @ t.operator).matrix
    a, b = (fs, ft) if conv.order == "same" else (ft, fs)
    r2 = _rel(np.linalg.norm(lhs - conv.composition_scalar * schur(qset, a, b).matrix), lhs)

    lhs = fourier(qset, t.dagger()).matrix
    r3 = _rel(np.linalg.norm(lhs - conv.dagger_scalar * real_conjugate(qset, ft).matrix), lhs)
    return ExchangeResiduals(r1, r2, r3, conv)


# -- idempotent transport ------------------------------------------------------------------

def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def projection_from_ranks(qset: QuantumSet, ranks, seed: int = 0) -> BimodularOperator:
    """A commutant projection with rank ``ranks[i][j]`` in block ``(i, j)``.

    Each block projection is a coordinate projection conjugated by a seeded
    random unitary (``seed=None`` keeps the coordinate projection).
    """
    dims = qset.algebra.block_dims
    ranks = np.asarray(ranks, dtype=int)
    if ranks.shape != (len(dims), len(dims)):
        raise ValueError(f"ranks must be a {len(dims)}x{len(dims)} array")
    rng = np.random.default_rng(seed) if seed is not None else None
    blocks = {}
    for i, ni in enumerate(dims):
        for j, nj in enumerate(dims):
            size, r = ni * nj, int(ranks[i, j])
            if not 0 <= r <= size:
                raise ValueError(f"rank {r} for block {(i, j)} outside 0..{size}")
            proj = np.diag([1.0] * r + [0.0] * (size - r)).astype(complex)
            if rng is not None:
                u = _random_unitary(size, rng)
                proj = u @ proj @ u.conj().T
            blocks[i, j] = proj
    return commutant_element(qset, blocks)


def idempotent_transport(qset: QuantumSet, ranks=None, seed: int = 0, idempotent=None,
                         product: str = "raw") -> QuantumGraph:
    """``make_graph(F₂(P))`` for a ∘-idempotent ``P`` given by block ranks or explicitly."""
    if idempotent is None:
        if ranks is None:
            raise ValueError("give either block ranks or an explicit idempotent")
        p = projection_from_ranks(qset, ranks, seed)
    else:
        p = idempotent if isinstance(idempotent, BimodularOperator) else as_bimodular(
            qset, idempotent)
        if np.linalg.norm(p.matrix @ p.matrix - p.matrix) > 1e-8 * max(1.0, np.linalg.norm(p.matrix)):
            raise ValueError("supplied operator is not a ∘-idempotent")
    return make_graph(qset, fourier(qset, p), product)


def fourier_of_identity_scalar(qset: QuantumSet) -> complex:
    """The scalar ``s`` with ``F₂(id) = s·e``."""
    f = fourier(qset, np.eye(qset.dim ** 2)).matrix
    return _fit(f, jones_projection(qset).matrix)[0]
