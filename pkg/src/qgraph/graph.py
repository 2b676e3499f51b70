"""Quantum sets, Schur products, and quantum graphs with their edge and path spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import (FaithfulState, GnsSpace, MultiMatrixAlgebra, ValidationError,
                      classical_state, delta_form_defect, diagonal_state, gns, make_algebra,
                      make_state, mult_map, trace_state)
from .linop import LinearOperator, ev_coev, identity, numerical_rank
from .tolerances import DEFAULT, Tolerances

PRODUCTS = ("raw", "normalized")


class DeltaFormError(ValidationError):
    """The state is not a δ-form: ``m∘m†`` is not a scalar."""


class NotAdjacencyError(ValueError):
    """An operator failed Schur-idempotency certification."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DegenerateInputError(ValueError):
    """The zero operator was offered where an invertible scalar is needed."""


class IdempotencyError(ArithmeticError):
    """No scalar multiple of an operator is idempotent within tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class QuantumSet:
    """A finite quantum set ``(B, ω)`` together with its GNS data.

    ``delta_form_residual`` is ``‖m∘m† − δ² id‖_F``; construction refuses
    non-δ-forms unless explicitly allowed.
    """

    gns: GnsSpace
    delta_sq: float
    delta_form_residual: float
    tol: Tolerances = DEFAULT

    @property
    def algebra(self) -> MultiMatrixAlgebra:
        return self.gns.algebra

    @property
    def state(self) -> FaithfulState:
        return self.gns.state

    @property
    def dim(self) -> int:
        return self.gns.dim

    @property
    def delta(self) -> float:
        return float(np.sqrt(self.delta_sq))

    @property
    def omega(self) -> np.ndarray:
        return self.gns.omega_vector

    @property
    def is_delta_form(self) -> bool:
        return self.delta_form_residual < self.tol.eq * max(1.0, self.delta_sq) * self.dim

    @property
    def is_classical(self) -> bool:
        return self.algebra.is_commutative

    @cached_property
    def m(self) -> LinearOperator:
        return mult_map(self.gns)

    @cached_property
    def m_dagger(self) -> LinearOperator:
        return self.m.dagger()

    @cached_property
    def duality(self):
        return ev_coev(self.gns, self.delta, tol=self.tol.eq)

    @cached_property
    def identity(self) -> LinearOperator:
        return identity(self.dim)

    def operator(self, matrix) -> LinearOperator:
        """Wrap a ``dim × dim`` matrix as an operator on ``H``."""
        return LinearOperator(np.asarray(matrix, dtype=complex), leg_dim=self.dim)

    def __repr__(self) -> str:
        return f"QuantumSet(blocks={self.algebra.block_dims}, delta_sq={self.delta_sq:.6g})"


def quantum_set(algebra: MultiMatrixAlgebra, state: FaithfulState,
                require_delta_form: bool = True, tol: Tolerances = DEFAULT) -> QuantumSet:
    space = gns(algebra, state, gram_tol=tol.gram)
    dsq, res = delta_form_defect(space)
    qset = QuantumSet(space, dsq, res, tol)
    if require_delta_form and not qset.is_delta_form:
        raise DeltaFormError(
            f"state is not a delta-form: per-block indices {state.index_blocks}, "
            f"residual {res:.3e}")
    return qset


def classical_qset(n_or_weights, require_delta_form: bool = True,
                   tol: Tolerances = DEFAULT) -> QuantumSet:
    """``C^N`` with uniform weights (an integer argument) or the given weights."""
    if np.isscalar(n_or_weights):
        n = int(n_or_weights)
        weights = np.full(n, 1.0 / n)
    else:
        weights = np.asarray(n_or_weights, dtype=float)
    alg, st = classical_state(weights)
    return quantum_set(alg, st, require_delta_form, tol)


def matrix_qset(weights: Sequence[float] | int, tol: Tolerances = DEFAULT) -> QuantumSet:
    """``M_N`` with a diagonal density, or the normalized trace for an integer ``N``."""
    if np.isscalar(weights):
        alg = make_algebra([int(weights)])
        return quantum_set(alg, trace_state(alg), tol=tol)
    alg, st = diagonal_state(weights)
    return quantum_set(alg, st, tol=tol)


def tracial_qset(block_dims: Sequence[int], tol: Tolerances = DEFAULT) -> QuantumSet:
    """The tracial δ-form on ``⊕ M_{n_i}``, with ``δ² = Σ n_i²``."""
    alg = make_algebra(block_dims)
    return quantum_set(alg, trace_state(alg), tol=tol)


def density_qset(block_dims: Sequence[int], density_blocks, require_delta_form: bool = True,
                 tol: Tolerances = DEFAULT) -> QuantumSet:
    alg = make_algebra(block_dims)
    return quantum_set(alg, make_state(alg, density_blocks, tol=tol.eq, faithful_tol=tol.faithful),
                       require_delta_form, tol)


# -- Schur product ------------------------------------------------------------

def _check_on_h(qset: QuantumSet, *ops: LinearOperator):
    for op in ops:
        if op.domain != ("H",) or op.codomain != ("H",) or op.leg_dim != qset.dim:
            raise TypeError(f"expected an operator on H of dim {qset.dim}, got {op!r}")


def schur(qset: QuantumSet, s: LinearOperator, t: LinearOperator) -> LinearOperator:
    """``S ⋆ T = m∘(S⊗T)∘m†``."""
    _check_on_h(qset, s, t)
    mat = qset.m.matrix @ np.kron(s.matrix, t.matrix) @ qset.m_dagger.matrix
    return LinearOperator(mat, leg_dim=qset.dim)


def schur_normalized(qset: QuantumSet, s: LinearOperator, t: LinearOperator) -> LinearOperator:
    """``δ⁻² (S ⋆ T)``; entrywise on uniform ``C^N``."""
    return schur(qset, s, t) * (1.0 / qset.delta_sq)


def schur_product(qset: QuantumSet, product: str):
    if product == "raw":
        return lambda s, t: schur(qset, s, t)
    if product == "normalized":
        return lambda s, t: schur_normalized(qset, s, t)
    raise ValueError(f"product must be one of {PRODUCTS}, got {product!r}")


def jones_projection(qset: QuantumSet) -> LinearOperator:
    """``e = |Ω⟩⟨Ω|``, the projection onto the scalars."""
    om = qset.omega
    return LinearOperator(np.outer(om, om.conj()), leg_dim=qset.dim)


def real_conjugate(qset: QuantumSet, t: LinearOperator) -> LinearOperator:
    """``T*(x) = T(x*)*``."""
    _check_on_h(qset, t)
    j = qset.gns.star_matrix
    return t.with_matrix(j @ t.matrix.conj() @ j.conj())


def choi_matrix(qset: QuantumSet, t: LinearOperator) -> np.ndarray:
    """Block-diagonal Choi matrix of ``T`` viewed as a map ``B -> B``.

    For each input block ``i`` and output block ``j`` this is
    ``Σ_ab E_ab ⊗ T(e^i_ab)_j``; ``T`` is completely positive iff all of them
    are positive semidefinite.
    """
    _check_on_h(qset, t)
    alg, space = qset.algebra, qset.gns
    pieces = []
    for i, n in enumerate(alg.block_dims):
        images = {}
        for a in range(n):
            for b in range(n):
                images[a, b] = space.element(t.matrix @ space.coords(alg.matrix_unit(i, a, b)))
        for j, k in enumerate(alg.block_dims):
            c = np.zeros((n * k, n * k), dtype=complex)
            for (a, b), img in images.items():
                c[a * k:(a + 1) * k, b * k:(b + 1) * k] = img.blocks[j]
            pieces.append(c)
    size = sum(p.shape[0] for p in pieces)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for p in pieces:
        out[pos:pos + p.shape[0], pos:pos + p.shape[0]] = p
        pos += p.shape[0]
    return out


# -- certification -------------------------------------------------------------

@dataclass(frozen=True)
class IdempotencyReport:
    scalar: complex
    residual: float
    product: str
    certified: bool


def idempotency_report(qset: QuantumSet, t: LinearOperator, product: str = "raw",
                       tol: float | None = None) -> IdempotencyReport:
    """Least-squares ``c`` with ``T⋆T ≈ cT`` and the relative residual."""
    tol = qset.tol.eq if tol is None else tol
    norm = t.norm()
    if norm == 0:
        raise DegenerateInputError("the zero operator is not an adjacency operator")
    tt = schur_product(qset, product)(t, t)
    c = t.inner(tt) / norm ** 2
    res = float(np.linalg.norm(tt.matrix - c * t.matrix) / norm)
    ok = res < tol * max(1.0, abs(c)) and abs(c.imag) < tol * max(1.0, abs(c)) and c.real > tol
    return IdempotencyReport(complex(c), res, product, bool(ok))


def certify_schur_idempotent(qset: QuantumSet, t: LinearOperator, product: str = "raw",
                             tol: float | None = None) -> float | None:
    """The positive scalar ``c`` with ``T⋆T = cT``, or ``None``."""
    rep = idempotency_report(qset, t, product, tol)
    return rep.scalar.real if rep.certified else None


# -- graphs --------------------------------------------------------------------

@dataclass(frozen=True)
class GraphFlags:
    self_adjoint: bool
    real: bool
    cp: bool
    reflexive_class: str
    reflexive_scalar: complex | None
    residuals: dict = field(default_factory=dict, compare=False)

    @property
    def reflexive(self) -> bool:
        return self.reflexive_class == "reflexive"

    @property
    def irreflexive(self) -> bool:
        return self.reflexive_class == "irreflexive"

    @property
    def undirected(self) -> bool:
        return self.self_adjoint and self.real


@dataclass(frozen=True, eq=False)
class QuantumGraph:
    qset: QuantumSet
    adjacency: LinearOperator
    idem_scalar: float
    product: str
    idem_residual: float

    @cached_property
    def flags(self) -> GraphFlags:
        return predicates(self)

    def __repr__(self) -> str:
        return (f"QuantumGraph({self.qset!r}, c={self.idem_scalar:.6g} [{self.product}])")


def make_graph(qset: QuantumSet, t, product: str = "normalized",
               tol: float | None = None) -> QuantumGraph:
    if not isinstance(t, LinearOperator):
        t = qset.operator(t)
    rep = idempotency_report(qset, t, product, tol)
    if not rep.certified:
        raise NotAdjacencyError(
            f"not an adjacency operator: T⋆T - cT residual {rep.residual:.3e} "
            f"with c = {rep.scalar:.6g} ({product} product)", rep.residual)
    return QuantumGraph(qset, t, rep.scalar.real, product, rep.residual)


def complete_graph(qset: QuantumSet, product: str = "normalized") -> QuantumGraph:
    return make_graph(qset, jones_projection(qset) * qset.delta_sq, product)


def trivial_graph(qset: QuantumSet, product: str = "normalized") -> QuantumGraph:
    return make_graph(qset, qset.identity, product)


def predicates(g: QuantumGraph, tol: float | None = None) -> GraphFlags:
    qset, t = g.qset, g.adjacency
    tol = qset.tol.eq if tol is None else tol
    scale = max(1.0, t.norm())
    sa_res = (t - t.dagger()).norm() / scale
    real_res = (t - real_conjugate(qset, t)).norm() / scale
    choi = choi_matrix(qset, t)
    herm_res = float(np.linalg.norm(choi - choi.conj().T)) / scale
    min_eig = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min()) / scale
    cp = herm_res < tol and min_eig > -tol

    prod = schur_product(qset, g.product)
    ti = prod(t, qset.identity)
    ident = qset.identity
    z = ident.inner(ti) / ident.norm() ** 2
    refl_res = (ti - ident * z).norm() / scale
    zero_res = ti.norm() / scale
    if zero_res < tol:
        cls, z_out = "irreflexive", None
    elif refl_res < tol and abs(z.imag) < tol and z.real > tol:
        cls, z_out = "reflexive", complex(z)
    else:
        cls, z_out = "neither", None
    return GraphFlags(bool(sa_res < tol), bool(real_res < tol), bool(cp), cls, z_out,
                      {"self_adjoint": sa_res, "real": real_res, "choi_min_eig": min_eig,
                       "reflexive": refl_res, "irreflexive": zero_res})


# -- counts, edges and paths -----------------------------------------------------

def vertex_count(qset: QuantumSet) -> float:
    return qset.delta_sq


def edge_count(g: QuantumGraph) -> float:
    om = g.qset.omega
    return float((g.qset.delta_sq * np.vdot(om, g.adjacency.matrix @ om)).real)


def _scale_to_idempotent(mat: np.ndarray, tol: float, what: str) -> tuple[np.ndarray, float]:
    sq = mat @ mat
    denom = np.vdot(sq, sq)
    if denom == 0:
        raise IdempotencyError(f"{what} is nilpotent", float(np.linalg.norm(mat)))
    s = np.vdot(sq, mat) / denom
    p = s * mat
    res = float(np.linalg.norm(p @ p - p) / max(1.0, np.linalg.norm(p)))
    if res > tol or abs(s.imag) > tol * max(1.0, abs(s)):
        raise IdempotencyError(f"{what} is not idempotent up to a scalar (residual {res:.3e})",
                               res)
    return p, float(s.real)


@dataclass(frozen=True, eq=False)
class ProjectorReport:
    projector: LinearOperator
    scalar: float
    rank: int


def edge_projector(g: QuantumGraph, tol: float | None = None) -> ProjectorReport:
    """``s·(m⊗id)(id⊗T̂⊗id)(id⊗m†)`` with ``s`` chosen to make it idempotent."""
    qset = g.qset
    tol = qset.tol.eq if tol is None else tol
    d = qset.dim
    eye = np.eye(d)
    m, md, t = qset.m.matrix, qset.m_dagger.matrix, g.adjacency.matrix
    raw = np.kron(m, eye) @ np.kron(np.kron(eye, t), eye) @ np.kron(eye, md)
    p, s = _scale_to_idempotent(raw, tol, "edge projector")
    op = LinearOperator(p, ("H", "H"), ("H", "H"), d)
    return ProjectorReport(op, s, numerical_rank(p, qset.tol.rank))


def path_space_projector(g: QuantumGraph, n: int, tol: float | None = None) -> ProjectorReport:
    """Projector onto length-``n`` quantum paths, on ``H^{⊗(n+1)}``.

    Built as ``(P₁ ⊗ id)(id ⊗ P_{n−1})`` and certified idempotent up to a scalar.
    """
    if n < 1:
        raise ValueError("path length must be at least 1")
    qset = g.qset
    tol = qset.tol.eq if tol is None else tol
    first = edge_projector(g, tol)
    if n == 1:
        return first
    d = qset.dim
    p1 = first.projector.matrix
    prev = p1
    for k in range(2, n + 1):
        left = np.kron(p1, np.eye(d ** (k - 1)))
        right = np.kron(np.eye(d), prev)
        prod = left @ right
        if np.linalg.norm(prod) < tol:
            prev = np.zeros_like(prod)  # no paths of this length
            continue
        prev, _ = _scale_to_idempotent(prod, tol, f"path projector (n={k})")
    legs = ("H",) * (n + 1)
    op = LinearOperator(prev, legs, legs, d)
    return ProjectorReport(op, 1.0, numerical_rank(prev, qset.tol.rank))


# -- biprojections -----------------------------------------------------------------

@dataclass(frozen=True)
class BiprojectionReport:
    is_biprojection: bool
    idempotent_residual: float
    self_adjoint_residual: float
    schur_scalar: float | None
    schur_residual: float
    rank: int

    def __bool__(self) -> bool:
        return self.is_biprojection


def is_biprojection(qset: QuantumSet, p: LinearOperator, product: str = "normalized",
                    tol: float | None = None) -> BiprojectionReport:
    tol = qset.tol.eq if tol is None else tol
    if not isinstance(p, LinearOperator):
        p = qset.operator(p)
    idem = (p @ p - p).norm()
    sa = (p - p.dagger()).norm()
    rep = idempotency_report(qset, p, product, tol)
    ok = idem < tol and sa < tol and rep.certified
    return BiprojectionReport(bool(ok), idem, sa, rep.scalar.real if rep.certified else None,
                              rep.residual, p.rank(qset.tol.rank))


def range_closure_residual(qset: QuantumSet, p: LinearOperator) -> float:
    """Largest ``‖(1−p)(xy)‖`` over products of an orthonormal basis of ``range(p)``."""
    u, s, _ = np.linalg.svd(p.matrix)
    r = numerical_rank(p.matrix, qset.tol.rank)
    basis = [qset.gns.element(u[:, k]) for k in range(r)]
    comp = np.eye(qset.dim) - p.matrix
    worst = 0.0
    for x in basis:
        for y in basis:
            worst = max(worst, float(np.linalg.norm(comp @ qset.gns.coords(x @ y))))
    return worst
