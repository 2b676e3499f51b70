"""Finite groups, group algebras, convolution idempotents and Cayley graphs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, ValidationError, make_algebra, trace_state
from .graph import QuantumGraph, QuantumSet, make_graph, quantum_set
from .linop import left_action
from .tolerances import DEFAULT

EXHAUSTIVE_ASSOC_LIMIT = 64


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A group given by its Cayley table on ``0..n-1``.

    ``irreps`` optionally lists unitary irreducible representations as arrays of
    shape ``(n, d, d)``; they are required for nonabelian group-algebra quantum sets.
    """

    table: np.ndarray
    labels: tuple = ()
    irreps: tuple = field(default=(), repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64)
        object.__setattr__(self, "table", t)
        t.setflags(write=False)
        _validate_table(t)
        if self.labels and len(self.labels) != len(t):
            raise ValidationError("labels must name every element")

    @property
    def order(self) -> int:
        return len(self.table)

    @cached_property
    def identity(self) -> int:
        n = self.order
        for e in range(n):
            if np.array_equal(self.table[e], np.arange(n)):
                return e
        raise ValidationError("no identity element")

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.array([int(np.nonzero(self.table[g] == self.identity)[0][0])
                        for g in range(self.order)])
        inv.setflags(write=False)
        return inv

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def conjugacy_classes(self) -> list[tuple[int, ...]]:
        seen, classes = set(), []
        for g in range(self.order):
            if g in seen:
                continue
            cls = sorted({self.mul(self.mul(h, g), int(self.inverse[h])) for h in range(self.order)})
            seen.update(cls)
            classes.append(tuple(cls))
        return classes

    def label(self, g: int):
        return self.labels[g] if self.labels else g


def _validate_table(t: np.ndarray):
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
        raise ValidationError("Cayley table must be a nonempty square array")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise ValidationError("Cayley table entries must lie in 0..n-1")
    full = np.arange(n)
    for g in range(n):
        if not np.array_equal(np.sort(t[g]), full):
            raise ValidationError(f"row {g} of the Cayley table is not a permutation")
        if not np.array_equal(np.sort(t[:, g]), full):
            raise ValidationError(f"column {g} of the Cayley table is not a permutation")
    ids = [e for e in range(n) if np.array_equal(t[e], full) and np.array_equal(t[:, e], full)]
    if not ids:
        raise ValidationError("Cayley table has no two-sided identity")
    if n <= EXHAUSTIVE_ASSOC_LIMIT:
        # (gh)k vs g(hk) over all triples at once
        left = t[t[:, :, None], np.arange(n)[None, None, :]]
        right = t[np.arange(n)[:, None, None], t[None, :, :]]
        bad = np.argwhere(left != right)
        if bad.size:
            g, h, k = (int(x) for x in bad[0])
            raise ValidationError(f"associativity fails for triple ({g}, {h}, {k})")
    else:
        rng = np.random.default_rng(0)
        for g, h, k in rng.integers(0, n, size=(4096, 3)):
            if t[t[g, h], k] != t[g, t[h, k]]:
                raise ValidationError(f"associativity fails for triple ({g}, {h}, {k})")


def from_table(table, labels: Sequence = ()) -> FiniteGroup:
    return FiniteGroup(np.asarray(table), tuple(labels))


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValidationError("cyclic group order must be positive")
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n)


def _s3_irreps(perms: list[tuple[int, ...]]) -> tuple:
    def sign(p):
        inv = sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])
        return -1.0 if inv % 2 else 1.0

    # standard representation: restrict the permutation matrices to the sum-zero plane
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    triv, sgn, std = [], [], []
    for p in perms:
        perm = np.zeros((3, 3))
        for i in range(3):
            perm[p[i], i] = 1.0
        triv.append([[1.0]])
        sgn.append([[sign(p)]])
        std.append(basis @ perm @ basis.T)
    return tuple(np.array(r, dtype=complex) for r in (triv, sgn, std))


def symmetric3() -> FiniteGroup:
    """``S₃`` on lexicographically ordered permutations, ``(στ)(i) = σ(τ(i))``."""
    perms = sorted(itertools.permutations(range(3)))
    index = {p: k for k, p in enumerate(perms)}
    table = [[index[tuple(s[t[i]] for i in range(3))] for t in perms] for s in perms]
    return FiniteGroup(np.array(table), tuple(perms), _s3_irreps(perms))


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """``G × H`` with element ``(a, b)`` at index ``a·|H| + b``."""
    n, m = g.order, h.order
    table = np.empty((n * m, n * m), dtype=np.int64)
    for a1, b1, a2, b2 in itertools.product(range(n), range(m), range(n), range(m)):
        table[a1 * m + b1, a2 * m + b2] = g.mul(a1, a2) * m + h.mul(b1, b2)
    labels = tuple((g.label(a), h.label(b)) for a in range(n) for b in range(m))
    return FiniteGroup(table, labels)


# -- group algebra -----------------------------------------------------------------

class GroupAlgebraElement:
    """``Σ_g a(g) u_g`` in ``C[Γ]``."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: FiniteGroup, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.shape != (group.order,):
            raise ValidationError(f"expected {group.order} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self.group = group
        self.coeffs = c

    def _check(self, other):
        if not isinstance(other, GroupAlgebraElement) or other.group is not self.group:
            raise TypeError("elements of different group algebras")

    def __add__(self, other):
        self._check(other)
        return GroupAlgebraElement(self.group, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return GroupAlgebraElement(self.group, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return GroupAlgebraElement(self.group, complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, GroupAlgebraElement) and other.group is self.group
                and np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"GroupAlgebraElement({self.coeffs.tolist()})"


def point_mass(group: FiniteGroup, g: int) -> GroupAlgebraElement:
    c = np.zeros(group.order)
    c[g] = 1
    return GroupAlgebraElement(group, c)


def averaging_idempotent(group: FiniteGroup) -> GroupAlgebraElement:
    return GroupAlgebraElement(group, np.full(group.order, 1.0 / group.order))


def convolve(a: GroupAlgebraElement, b: GroupAlgebraElement) -> GroupAlgebraElement:
    """``(a∗b)(g) = Σ_h a(h) b(h⁻¹g)``."""
    a._check(b)
    grp = a.group
    out = np.zeros(grp.order, dtype=complex)
    for h in range(grp.order):
        if a.coeffs[h] == 0:
            continue
        # b(h⁻¹g) u_g summed over g is b shifted: u_h ∗ u_k = u_{hk}
        out[grp.table[h]] += a.coeffs[h] * b.coeffs
    return GroupAlgebraElement(grp, out)


def is_convolution_idempotent(a: GroupAlgebraElement, tol: float = DEFAULT.eq) -> bool:
    return bool(np.abs(convolve(a, a).coeffs - a.coeffs).max() < tol)


def regular_representation(group: FiniteGroup, g: int) -> np.ndarray:
    """``λ(g) u_h = u_{gh}``."""
    n = group.order
    mat = np.zeros((n, n))
    mat[group.table[g], np.arange(n)] = 1.0
    return mat


def characters(group: FiniteGroup, tol: float = 1e-8) -> np.ndarray:
    """Character table of an abelian group, rows indexed by characters.

    Common eigenvectors of the regular representation are found by splitting
    eigenspaces one group element at a time; each is scaled so its identity
    coordinate is 1, which makes it a character. The trivial character comes
    first and the rest are sorted by their phase profile.
    """
    if not group.is_abelian:
        raise ValidationError("characters() is only available for abelian groups")
    n = group.order
    spaces = [np.eye(n, dtype=complex)]
    for g in range(n):
        lam = regular_representation(group, g)
        refined = []
        for sp in spaces:
            if sp.shape[1] == 1:
                refined.append(sp)
                continue
            vals, vecs = np.linalg.eig(sp.conj().T @ lam @ sp)
            order = np.lexsort((np.round(vals.imag, 6), np.round(vals.real, 6)))
            vals, vecs = vals[order], vecs[:, order]
            start = 0
            for k in range(1, len(vals) + 1):
                if k == len(vals) or abs(vals[k] - vals[start]) > tol:
                    q, _ = np.linalg.qr(sp @ vecs[:, start:k])
                    refined.append(q)
                    start = k
        spaces = refined
    if any(sp.shape[1] != 1 for sp in spaces):
        raise ValidationError("failed to separate characters")
    rows = []
    for sp in spaces:
        v = sp[:, 0]
        # λ(g)v = c_g v gives v(g) = c_g v(e)
        chi = v / v[group.identity]
        rows.append(chi)
    table = np.array(rows)
    phases = np.mod(np.angle(table), 2 * np.pi)
    phases[np.abs(phases - 2 * np.pi) < 1e-9] = 0.0
    keys = [tuple(np.round(p, 9)) for p in phases]
    order = sorted(range(len(rows)), key=lambda k: keys[k])
    table = table[order]
    for a in range(n):
        for b in range(n):
            prod = table[:, a] * table[:, b]
            if np.abs(prod - table[:, group.mul(a, b)]).max() > 1e-8:
                raise ValidationError("character extraction produced a non-homomorphism")
    return table


def character_idempotent(group: FiniteGroup, chi: np.ndarray) -> GroupAlgebraElement:
    """``p_χ = |Γ|⁻¹ Σ_g conj(χ(g)) u_g``."""
    return GroupAlgebraElement(group, np.conj(chi) / group.order)


def irrep_characters(group: FiniteGroup) -> np.ndarray:
    """Traces of the stored irreducible representations, one row per irrep."""
    if not group.irreps:
        raise ValidationError("group carries no irreducible representations")
    return np.array([np.trace(r, axis1=1, axis2=2) for r in group.irreps])


def central_idempotents(group: FiniteGroup) -> list[GroupAlgebraElement]:
    """``p_π = (d_π/|Γ|) Σ_g χ_π(g⁻¹) u_g`` for the stored irreps."""
    chars = irrep_characters(group)
    out = []
    for r, chi in zip(group.irreps, chars):
        d = r.shape[1]
        out.append(GroupAlgebraElement(group, d / group.order * chi[group.inverse]))
    return out


@dataclass(frozen=True)
class StarTableReport:
    checked: int
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


def point_mass_star_table(group: FiniteGroup) -> StarTableReport:
    """Check ``P_a ⋆ P_b = P_{ab}`` for all pairs, in exact integer arithmetic.

    ``P_g = |u_g⟩⟨u_g|`` on ``ℓ²(Γ)`` and ``⋆`` uses ``m(u_g⊗u_h) = u_{gh}`` and
    ``m†(u_c) = Σ_g u_g ⊗ u_{g⁻¹c}``.
    """
    n = group.order
    m = np.zeros((n, n * n), dtype=np.int64)
    for g in range(n):
        for h in range(n):
            m[group.mul(g, h), g * n + h] = 1
    mdag = m.T.copy()
    failures = []
    for a in range(n):
        pa = np.zeros((n, n), dtype=np.int64)
        pa[a, a] = 1
        for b in range(n):
            pb = np.zeros((n, n), dtype=np.int64)
            pb[b, b] = 1
            star = m @ np.kron(pa, pb) @ mdag
            target = np.zeros((n, n), dtype=np.int64)
            ab = group.mul(a, b)
            target[ab, ab] = 1
            if not np.array_equal(star, target):
                failures.append((a, b))
    return StarTableReport(n * n, tuple(failures))


def cayley_adjacency(group: FiniteGroup, subset: Sequence[int]) -> np.ndarray:
    """``A[c, a] = 1`` iff ``c = a·s`` for some ``s`` in the subset."""
    subset = sorted(set(int(s) for s in subset))
    if not subset:
        raise ValidationError("the connection set must be nonempty")
    n = group.order
    if subset[0] < 0 or subset[-1] >= n:
        raise ValidationError("connection set contains a non-element")
    a = np.zeros((n, n), dtype=np.int64)
    for s in subset:
        a[group.table[:, s], np.arange(n)] = 1
    return a


# -- the group algebra as a quantum set ----------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupAlgebraQSet:
    """``C[Γ] ≅ ⊕_π M_{d_π}`` with its canonical trace, and the images of ``u_g``."""

    group: FiniteGroup
    qset: QuantumSet
    images: tuple[AlgebraElement, ...]

    def element(self, a: GroupAlgebraElement) -> AlgebraElement:
        out = self.qset.algebra.zero()
        for c, img in zip(a.coeffs, self.images):
            if c != 0:
                out = out + img * c
        return out

    @cached_property
    def group_basis(self) -> np.ndarray:
        """Columns are Pimsner–Popa coordinates of the images of ``u_g``."""
        return np.column_stack([self.qset.gns.coords(x) for x in self.images])


def group_algebra_qset(group: FiniteGroup) -> GroupAlgebraQSet:
    """Abelian groups use their characters; nonabelian groups need stored irreps."""
    n = group.order
    if group.is_abelian:
        chars = characters(group)
        alg = make_algebra([1] * n)
        images = tuple(alg.from_blocks([np.array([[chars[k, g]]]) for k in range(n)])
                       for g in range(n))
    else:
        if not group.irreps:
            raise ValidationError("nonabelian groups need irreducible representations")
        dims = [r.shape[1] for r in group.irreps]
        if sum(d * d for d in dims) != n:
            raise ValidationError("irreps do not exhaust the group algebra")
        alg = make_algebra(dims)
        images = tuple(alg.from_blocks([r[g] for r in group.irreps]) for g in range(n))
    qset = quantum_set(alg, trace_state(alg))
    ga = GroupAlgebraQSet(group, qset, images)
    gram = ga.group_basis.conj().T @ ga.group_basis
    if np.abs(gram - np.eye(n)).max() > 1e-9:
        raise ValidationError("group elements are not orthonormal in the trace GNS space")
    return ga


def convolution_operator(group: FiniteGroup, p: GroupAlgebraElement) -> np.ndarray:
    """Matrix of ``a ↦ p ∗ a`` on ``ℓ²(Γ)`` in the basis ``u_g``."""
    out = np.zeros((group.order, group.order), dtype=complex)
    for h in range(group.order):
        out += p.coeffs[h] * regular_representation(group, h)
    return out


def quantum_cayley_graph(ga: GroupAlgebraQSet | FiniteGroup, p: GroupAlgebraElement,
                         product: str = "normalized") -> QuantumGraph:
    """Graph on ``C[Γ]`` whose adjacency is left convolution by the idempotent ``p``."""
    if isinstance(ga, FiniteGroup):
        ga = group_algebra_qset(ga)
    if p.group is not ga.group:
        raise TypeError("idempotent belongs to a different group")
    if not is_convolution_idempotent(p):
        raise ValidationError("p is not a convolution idempotent")
    adj = left_action(ga.qset.gns, ga.element(p))
    return make_graph(ga.qset, adj, product)
