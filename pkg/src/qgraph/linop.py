"""Dense operators on GNS spaces and their tensor powers.

Conjugate legs ``Hbar`` share the coordinate space of ``H``: the vector
``conj(c)`` represents the conjugate of the vector with coordinates ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .tolerances import DEFAULT

if TYPE_CHECKING:
    from .algebra import AlgebraElement, GnsSpace

LEG_TAGS = ("H", "Hbar")


class ZigZagError(RuntimeError):
    """Duality maps failed their own consistency check (construction bug guard)."""


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A complex matrix from ``domain`` legs to ``codomain`` legs.

    Every leg has dimension ``leg_dim``; an empty leg list stands for ``C``.
    """

    matrix: np.ndarray
    domain: tuple[str, ...] = ("H",)
    codomain: tuple[str, ...] = ("H",)
    leg_dim: int = field(default=0)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2:
            raise ValueError(f"operator matrix must be 2-d, got shape {mat.shape}")
        dom, cod = tuple(self.domain), tuple(self.codomain)
        for tag in dom + cod:
            if tag not in LEG_TAGS:
                raise ValueError(f"unknown leg tag {tag!r}")
        d = self.leg_dim
        if d == 0:
            d = _infer_leg_dim(mat.shape, len(cod), len(dom))
        if mat.shape != (d ** len(cod), d ** len(dom)):
            raise ValueError(
                f"matrix shape {mat.shape} does not match legs {cod} <- {dom} of dim {d}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "codomain", cod)
        object.__setattr__(self, "leg_dim", d)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_square(self) -> bool:
        return self.domain == self.codomain

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.matrix.conj().T, self.codomain, self.domain, self.leg_dim)

    def compose(self, other: "LinearOperator") -> "LinearOperator":
        """``self ∘ other``."""
        if other.codomain != self.domain or other.leg_dim != self.leg_dim:
            raise TypeError(f"cannot compose {self.domain} with codomain {other.codomain}")
        return LinearOperator(self.matrix @ other.matrix, other.domain, self.codomain,
                              self.leg_dim)

    __matmul__ = compose

    def tensor(self, other: "LinearOperator") -> "LinearOperator":
        if other.leg_dim != self.leg_dim:
            raise TypeError("tensor factors live on different GNS spaces")
        return LinearOperator(np.kron(self.matrix, other.matrix), self.domain + other.domain,
                              self.codomain + other.codomain, self.leg_dim)

    def _check_same(self, other: "LinearOperator"):
        if (other.domain, other.codomain, other.leg_dim) != (
                self.domain, self.codomain, self.leg_dim):
            raise TypeError("operators act between different spaces")

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self._check_same(other)
        return self.with_matrix(self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        self._check_same(other)
        return self.with_matrix(self.matrix - other.matrix)

    def __mul__(self, scalar) -> "LinearOperator":
        return self.with_matrix(complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return self.with_matrix(-self.matrix)

    def with_matrix(self, matrix: np.ndarray) -> "LinearOperator":
        return LinearOperator(matrix, self.domain, self.codomain, self.leg_dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def inner(self, other: "LinearOperator") -> complex:
        """Frobenius inner product, conjugate-linear in ``self``."""
        return complex(np.vdot(self.matrix, other.matrix))

    def allclose(self, other: "LinearOperator", tol: float = DEFAULT.eq) -> bool:
        self._check_same(other)
        return bool(np.linalg.norm(self.matrix - other.matrix) < tol)

    def rank(self, tol: float = DEFAULT.rank) -> int:
        return numerical_rank(self.matrix, tol)

    def __repr__(self) -> str:
        return (f"LinearOperator({'⊗'.join(self.codomain) or 'C'} <- "
                f"{'⊗'.join(self.domain) or 'C'}, dim {self.leg_dim})")


def _infer_leg_dim(shape, n_cod: int, n_dom: int) -> int:
    for size, n in ((shape[0], n_cod), (shape[1], n_dom)):
        if n:
            d = round(size ** (1.0 / n))
            if d ** n == size:
                return d
            raise ValueError(f"size {size} is not a {n}-th power")
    return 1


def numerical_rank(matrix: np.ndarray, tol: float = DEFAULT.rank) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def identity(d: int, legs: Sequence[str] = ("H",)) -> LinearOperator:
    legs = tuple(legs)
    return LinearOperator(np.eye(d ** len(legs)), legs, legs, d)


def zero(d: int, legs: Sequence[str] = ("H",)) -> LinearOperator:
    legs = tuple(legs)
    n = d ** len(legs)
    return LinearOperator(np.zeros((n, n)), legs, legs, d)


def vec_to_op(vec: np.ndarray, d: int) -> np.ndarray:
    """Reshape a vector of ``H⊗Hbar`` into the matrix ``Σ c_ab |u_a⟩⟨u_b|``."""
    return np.asarray(vec).reshape(d, d)


def op_to_vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat).reshape(-1)


# -- module actions ---------------------------------------------------------

def _check_element(gns: "GnsSpace", x: "AlgebraElement"):
    if x.algebra != gns.algebra:
        raise TypeError("element belongs to a different algebra")


def left_action(gns: "GnsSpace", x: "AlgebraElement") -> LinearOperator:
    """Matrix of ``ξ ↦ xξ`` in the Pimsner–Popa basis."""
    _check_element(gns, x)
    cols = [gns.coords(x @ u) for u in gns.pp_basis]
    return LinearOperator(np.column_stack(cols), leg_dim=gns.dim)


def right_action(gns: "GnsSpace", x: "AlgebraElement") -> LinearOperator:
    """Matrix of ``ξ ↦ ξx`` in the Pimsner–Popa basis."""
    _check_element(gns, x)
    cols = [gns.coords(u @ x) for u in gns.pp_basis]
    return LinearOperator(np.column_stack(cols), leg_dim=gns.dim)


def conjugate_right_action(gns: "GnsSpace", x: "AlgebraElement") -> LinearOperator:
    """Right action ``η̄ ↦ η̄·x = conj(x*η)`` on ``Hbar``; its matrix is ``L_x^T``."""
    m = left_action(gns, x).matrix.T
    return LinearOperator(m, ("Hbar",), ("Hbar",), gns.dim)


@dataclass(frozen=True)
class ConjugationMap:
    """Antilinear identification ``H -> Hbar`` in Pimsner–Popa coordinates."""

    dim: int

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return np.conj(np.asarray(coords, dtype=complex))

    def bar(self, op: LinearOperator) -> LinearOperator:
        """The conjugate operator ``T̄(η̄) = conj(Tη)`` with every leg flipped."""
        flip = {"H": "Hbar", "Hbar": "H"}
        return LinearOperator(op.matrix.conj(), tuple(flip[t] for t in op.domain),
                              tuple(flip[t] for t in op.codomain), op.leg_dim)


# -- commutants -------------------------------------------------------------

def commutant_basis(ops: Sequence[LinearOperator], dim: int | None = None,
                    tol: float = DEFAULT.commutant) -> list[LinearOperator]:
    """Frobenius-orthonormal basis of ``{T : T A = A T for all A in ops}``.

    The null space of the stacked constraints is read off an SVD; singular
    values below ``tol`` times the largest count as zero.
    """
    ops = list(ops)
    if not ops:
        if dim is None:
            raise ValueError("dim is required when no operators are given")
        legs, n, d = ("H",), dim, dim
    else:
        first = ops[0]
        if not first.is_square:
            raise TypeError("commutant operators must be square")
        for op in ops:
            if op.domain != first.domain or op.codomain != first.domain or op.leg_dim != first.leg_dim:
                raise TypeError("commutant operators must act on a common space")
        legs, n, d = first.domain, first.shape[0], first.leg_dim
    if not ops:
        basis = np.eye(n * n)
    else:
        eye = np.eye(n)
        # row-major vec: vec(TA) = (I ⊗ A^T) vec(T), vec(AT) = (A ⊗ I) vec(T)
        rows = [np.kron(eye, op.matrix.T) - np.kron(op.matrix, eye) for op in ops]
        stacked = np.vstack(rows)
        # the thin SVD keeps every right singular vector once rows outnumber columns
        _, s, vh = np.linalg.svd(stacked, full_matrices=stacked.shape[0] < stacked.shape[1])
        if s.size == 0 or s[0] == 0:
            basis = np.eye(n * n)
        else:
            s_full = np.zeros(n * n)
            s_full[: s.size] = s
            null = s_full <= tol * s[0]
            basis = vh[null].conj()
    return [LinearOperator(v.reshape(n, n), legs, legs, d) for v in basis]


def span_projector(basis: Sequence[LinearOperator]) -> np.ndarray:
    """Orthogonal projector (on vectorised operators) onto the span of ``basis``."""
    if not basis:
        return np.zeros((0, 0))
    v = np.column_stack([b.matrix.reshape(-1) for b in basis])
    q, _ = np.linalg.qr(v)
    return q @ q.conj().T


# -- duality data -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvCoevData:
    """Duality maps for ``X = L²(B, ω)`` as a B-C correspondence.

    ``ev`` and ``ev_dagger`` act on ``Xbar ⊠_B X``, identified with ``H``
    through ``η̄ ⊠ ξ ↦ η*ξ``. ``coev`` maps ``B ≅ H`` into ``H ⊗ Hbar`` and
    ``coev_dagger`` is ``η ⊗ ξ̄ ↦ δ⁻¹ ηξ*``.
    """

    gns: "GnsSpace"
    delta: float
    ev: LinearOperator
    ev_dagger: LinearOperator
    coev: LinearOperator
    coev_dagger: LinearOperator
    zigzag_residuals: tuple[float, ...]

    @property
    def ev_loop(self) -> complex:
        """The scalar ``ev ∘ ev†``."""
        return complex((self.ev.matrix @ self.ev_dagger.matrix)[0, 0])

    def coev_loop(self) -> tuple[complex, float]:
        """Least-squares scalar for ``coev† ∘ coev`` and its residual."""
        loop = self.coev_dagger.matrix @ self.coev.matrix
        n = loop.shape[0]
        s = np.trace(loop) / n
        return complex(s), float(np.linalg.norm(loop - s * np.eye(n)))


def ev_coev(gns: "GnsSpace", delta: float | None = None,
            tol: float = DEFAULT.eq) -> EvCoevData:
    """Build the duality maps and check both zig-zag identities."""
    d = gns.dim
    if delta is None:
        delta = float(np.sqrt(gns.state.delta_sq))
    omega = gns.omega_vector
    ev = LinearOperator(omega.conj()[None, :], ("H",), (), d)
    ev_dag = LinearOperator(delta * omega[:, None], (), ("H",), d)

    # coev(b) = Σ_k u_k ⊗ conj(b* u_k), whose H⊗Hbar matrix is L_b
    coev_cols = [left_action(gns, u).matrix.reshape(-1) for u in gns.pp_basis]
    coev = LinearOperator(np.column_stack(coev_cols), ("H",), ("H", "Hbar"), d)
    basis = gns.pp_basis
    coev_dag_cols = [gns.coords(basis[a] @ basis[b].adjoint()) / delta
                     for a in range(d) for b in range(d)]
    coev_dag = LinearOperator(np.column_stack(coev_dag_cols), ("H", "Hbar"), ("H",), d)

    # pairing[k, j] = ev(ū_k ⊠ u_j) = ev(u_k* u_j)
    pairing = np.array([[(ev.matrix @ gns.coords(basis[k].adjoint() @ basis[j]))[0]
                         for j in range(d)] for k in range(d)])
    coev1 = coev.matrix @ gns.omega_vector  # coev(1) as a d×d array of |u_a><u_b| weights
    coev1 = coev1.reshape(d, d)
    # (id ⊗ ev)(coev ⊗ id) on X: ξ ↦ Σ_ab coev1[a,b] u_a ev(ū_b ⊠ ξ)
    zig_x = coev1 @ pairing
    # (ev ⊗ id)(id ⊗ coev) on Xbar, in conjugated coordinates
    zig_xbar = (pairing @ coev1).T
    # (coev† ⊗ id)(id ⊗ ev†) on X: ξ ↦ coev†(ξ ⊗ conj(ev†(1)))
    ev1 = gns.element(ev_dag.matrix[:, 0])
    zig_dag = np.column_stack([gns.coords(u @ ev1.adjoint()) / delta for u in basis])
    eye = np.eye(d)
    residuals = tuple(float(np.linalg.norm(z - eye)) for z in (zig_x, zig_xbar, zig_dag))
    if max(residuals) > tol * max(1.0, d):
        raise ZigZagError(f"zig-zag residuals {residuals} exceed tolerance {tol}")
    return EvCoevData(gns, float(delta), ev, ev_dag, coev, coev_dag, residuals)
