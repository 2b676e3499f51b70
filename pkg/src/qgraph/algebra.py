"""Multi-matrix C*-algebras, faithful states and their GNS spaces."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .linop import LinearOperator
from .tolerances import DEFAULT


class ValidationError(ValueError):
    """Input data violates a structural invariant."""


class FaithfulnessError(ValidationError):
    """A state (or its Gram matrix) is not faithful to working precision."""


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    """``B = M_{n_1} ⊕ ... ⊕ M_{n_k}``."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(self.block_dims)
        if not dims:
            raise ValidationError("an algebra needs at least one block")
        for n in dims:
            if int(n) != n or n < 1:
                raise ValidationError(f"block dimensions must be positive integers, got {n!r}")
        object.__setattr__(self, "block_dims", tuple(int(n) for n in dims))

    @property
    def total_dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((n, n)) for n in self.block_dims])

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(n) for n in self.block_dims])

    def matrix_unit(self, block: int, a: int, b: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n)) for n in self.block_dims]
        blocks[block][a, b] = 1.0
        return AlgebraElement(self, blocks)

    def matrix_units(self) -> list["AlgebraElement"]:
        """All matrix units in block, row, column order."""
        return [self.matrix_unit(i, a, b)
                for i, n in enumerate(self.block_dims)
                for a in range(n) for b in range(n)]

    def from_blocks(self, blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, blocks)

    def from_vector(self, vec: np.ndarray) -> "AlgebraElement":
        """Inverse of :attr:`AlgebraElement.vector` (row-major blocks, concatenated)."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.total_dim,):
            raise ValidationError(f"expected a vector of length {self.total_dim}")
        blocks, pos = [], 0
        for n in self.block_dims:
            blocks.append(vec[pos:pos + n * n].reshape(n, n))
            pos += n * n
        return AlgebraElement(self, blocks)

    def block_slices(self) -> list[slice]:
        out, pos = [], 0
        for n in self.block_dims:
            out.append(slice(pos, pos + n * n))
            pos += n * n
        return out


def make_algebra(block_dims: Sequence[int]) -> MultiMatrixAlgebra:
    return MultiMatrixAlgebra(tuple(block_dims))


class AlgebraElement:
    """An element of a multi-matrix algebra, stored block by block."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: MultiMatrixAlgebra, blocks: Sequence[np.ndarray]):
        blocks = [np.array(b, dtype=complex) for b in blocks]
        if len(blocks) != len(algebra.block_dims):
            raise ValidationError(
                f"expected {len(algebra.block_dims)} blocks, got {len(blocks)}")
        for i, (b, n) in enumerate(zip(blocks, algebra.block_dims)):
            if b.shape != (n, n):
                raise ValidationError(f"block {i} has shape {b.shape}, expected {(n, n)}")
            b.setflags(write=False)
        self.algebra = algebra
        self.blocks = tuple(blocks)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement) or other.algebra != self.algebra:
            raise TypeError("elements belong to different algebras")

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [b.conj().T for b in self.blocks])

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [complex(scalar) * b for b in self.blocks])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement) and other.algebra == self.algebra
                and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)))

    __hash__ = None

    def allclose(self, other: "AlgebraElement", tol: float = DEFAULT.eq) -> bool:
        self._check(other)
        return bool(np.linalg.norm(self.vector - other.vector) < tol)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def __repr__(self) -> str:
        return f"AlgebraElement({self.algebra.block_dims}, {[b.tolist() for b in self.blocks]})"


@dataclass(frozen=True, eq=False)
class FaithfulState:
    """``ω(x) = Σ_i tr(W_i x_i)`` for positive definite density blocks ``W_i``.

    ``index_blocks`` holds ``tr(W_i⁻¹)`` per block. ``delta_sq`` is the
    least-squares scalar fitted to ``m∘m†``, which on block ``i`` acts as
    ``tr(W_i⁻¹)``; it is the common value exactly when ω is a δ-form.
    """

    algebra: MultiMatrixAlgebra
    density_blocks: tuple[np.ndarray, ...]
    index_blocks: tuple[float, ...]
    delta_sq: float

    def __call__(self, x: AlgebraElement) -> complex:
        if x.algebra != self.algebra:
            raise TypeError("element belongs to a different algebra")
        return complex(sum(np.trace(w @ b) for w, b in zip(self.density_blocks, x.blocks)))

    @property
    def is_delta_form_exact(self) -> bool:
        vals = np.array(self.index_blocks)
        return bool(np.ptp(vals) <= DEFAULT.eq * max(1.0, float(vals.max())))


def make_state(algebra: MultiMatrixAlgebra, density_blocks: Sequence[np.ndarray],
               tol: float = DEFAULT.eq, faithful_tol: float = DEFAULT.faithful) -> FaithfulState:
    blocks = [np.array(w, dtype=complex) for w in density_blocks]
    if len(blocks) != len(algebra.block_dims):
        raise ValidationError(
            f"expected {len(algebra.block_dims)} density blocks, got {len(blocks)}")
    for i, (w, n) in enumerate(zip(blocks, algebra.block_dims)):
        if w.shape != (n, n):
            raise ValidationError(f"density block {i} has shape {w.shape}, expected {(n, n)}")
        if np.linalg.norm(w - w.conj().T) > tol:
            raise ValidationError(f"density block {i} is not Hermitian")
        lo = np.linalg.eigvalsh(w).min()
        if lo <= faithful_tol:
            raise FaithfulnessError(
                f"density block {i} has eigenvalue {lo:.3e} <= {faithful_tol:g}; state not faithful")
    total = sum(np.trace(w).real for w in blocks)
    if abs(total - 1.0) > tol:
        raise ValidationError(f"density blocks have total trace {total}, expected 1")
    index = tuple(float(np.trace(np.linalg.inv(w)).real) for w in blocks)
    weights = np.array([n * n for n in algebra.block_dims], dtype=float)
    delta_sq = float(np.dot(weights, index) / weights.sum())
    for w in blocks:
        w.setflags(write=False)
    return FaithfulState(algebra, tuple(blocks), index, delta_sq)


def trace_state(algebra: MultiMatrixAlgebra) -> FaithfulState:
    """The tracial δ-form ``W_i = (n_i / dim B) I``; uniform on ``C^N``, ``tr`` on ``M_N``."""
    d = algebra.total_dim
    return make_state(algebra, [np.eye(n) * n / d for n in algebra.block_dims])


def diagonal_state(weights: Sequence[float]) -> tuple[MultiMatrixAlgebra, FaithfulState]:
    """``M_N`` with ``W = diag(weights)``."""
    w = np.asarray(weights, dtype=float)
    alg = make_algebra([len(w)])
    return alg, make_state(alg, [np.diag(w)])


def classical_state(weights: Sequence[float]) -> tuple[MultiMatrixAlgebra, FaithfulState]:
    """``C^N`` with point weights ``q_l``."""
    w = np.asarray(weights, dtype=float)
    alg = make_algebra([1] * len(w))
    return alg, make_state(alg, [np.array([[q]]) for q in w])


@dataclass(frozen=True, eq=False)
class GnsSpace:
    """``L²(B, ω)`` with an orthonormal Pimsner–Popa basis.

    ``change`` maps Pimsner–Popa coordinates to the raw matrix-unit vector of
    an element; ``inv_change`` goes back.
    """

    algebra: MultiMatrixAlgebra
    state: FaithfulState
    change: np.ndarray
    inv_change: np.ndarray

    @property
    def dim(self) -> int:
        return self.algebra.total_dim

    @cached_property
    def pp_basis(self) -> tuple[AlgebraElement, ...]:
        return tuple(self.algebra.from_vector(col) for col in self.change.T)

    @cached_property
    def omega_vector(self) -> np.ndarray:
        v = self.coords(self.algebra.unit())
        v.setflags(write=False)
        return v

    def coords(self, x: AlgebraElement) -> np.ndarray:
        if x.algebra != self.algebra:
            raise TypeError("element belongs to a different algebra")
        return self.inv_change @ x.vector

    def element(self, coords: np.ndarray) -> AlgebraElement:
        return self.algebra.from_vector(self.change @ np.asarray(coords, dtype=complex))

    def inner(self, x: AlgebraElement, y: AlgebraElement) -> complex:
        """``⟨x|y⟩ = ω(x*y)``."""
        return self.state(x.adjoint() @ y)

    def gram(self) -> np.ndarray:
        basis = self.pp_basis
        return np.array([[self.inner(a, b) for b in basis] for a in basis])

    @cached_property
    def star_matrix(self) -> np.ndarray:
        """``J`` with ``coords(x*) = J @ conj(coords(x))``."""
        cols = [self.coords(u.adjoint()) for u in self.pp_basis]
        return np.column_stack(cols)


def raw_gram(algebra: MultiMatrixAlgebra, state: FaithfulState) -> np.ndarray:
    """Gram matrix ``ω(e_{ab}* e_{cd})`` of the matrix units, blockwise ``I ⊗ W^T``."""
    blocks = [np.kron(np.eye(n), w.T) for n, w in zip(algebra.block_dims, state.density_blocks)]
    d = algebra.total_dim
    g = np.zeros((d, d), dtype=complex)
    for sl, blk in zip(algebra.block_slices(), blocks):
        g[sl, sl] = blk
    return g


def gns(algebra: MultiMatrixAlgebra, state: FaithfulState,
        gram_tol: float = DEFAULT.gram) -> GnsSpace:
    """GNS space with the Cholesky-orthonormalised matrix-unit basis.

    For diagonal ``W`` this gives ``u_{ab} = q_b^{-1/2} e_{ab}`` exactly.
    """
    if state.algebra != algebra:
        raise ValidationError("state is defined on a different algebra")
    g = raw_gram(algebra, state)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise FaithfulnessError("Gram matrix of matrix units is singular") from exc
    # G = L L*, basis u = e L^{-*}: raw = L^{-*} c and c = L* raw
    inv_change = chol.conj().T
    change = np.linalg.inv(inv_change)
    space = GnsSpace(algebra, state, change, inv_change)
    err = np.linalg.norm(space.gram() - np.eye(space.dim))
    if err > gram_tol * max(1.0, space.dim):
        raise FaithfulnessError(f"Pimsner–Popa basis Gram defect {err:.3e}")
    return space


@dataclass(frozen=True)
class IndexReport:
    element: AlgebraElement
    is_scalar: bool
    scalar: float | None


def watatani_index(space: GnsSpace, basis: Sequence[AlgebraElement] | None = None,
                   tol: float = DEFAULT.eq) -> IndexReport:
    """``Σ_i u_i u_i*`` over a Pimsner–Popa basis (the stored one by default)."""
    basis = space.pp_basis if basis is None else basis
    total = space.algebra.zero()
    for u in basis:
        total = total + u @ u.adjoint()
    unit = space.algebra.unit()
    n = unit.vector
    s = complex(np.vdot(n, total.vector) / np.vdot(n, n))
    scalar = total.allclose(unit * s, tol * max(1.0, abs(s))) and abs(s.imag) < tol
    return IndexReport(total, bool(scalar), float(s.real) if scalar else None)


def mult_map(space: GnsSpace) -> LinearOperator:
    """Multiplication ``H⊗H -> H`` in Pimsner–Popa coordinates."""
    basis = space.pp_basis
    d = space.dim
    cols = [space.coords(basis[j] @ basis[k]) for j in range(d) for k in range(d)]
    return LinearOperator(np.column_stack(cols), ("H", "H"), ("H",), d)


def mult_adjoint(space: GnsSpace) -> LinearOperator:
    return mult_map(space).dagger()


def delta_form_defect(space: GnsSpace) -> tuple[float, float]:
    """Least-squares ``δ̂²`` with ``m∘m† ≈ δ̂² id`` and the Frobenius residual."""
    m = mult_map(space).matrix
    mm = m @ m.conj().T
    d = space.dim
    s = np.trace(mm).real / d
    return float(s), float(np.linalg.norm(mm - s * np.eye(d)))
