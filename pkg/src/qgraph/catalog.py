"""Built-in example graphs and brute-force oracles that do not share code with the core."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import (QuantumGraph, classical_qset, complete_graph, make_graph,
                    matrix_qset, tracial_qset, trivial_graph)
from .groups import (character_idempotent, characters, cyclic, group_algebra_qset,
                     point_mass, quantum_cayley_graph, symmetric3, central_idempotents)


# -- oracles ------------------------------------------------------------------------

def entrywise_schur(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.asarray(s) * np.asarray(t)


def walk_count(adjacency: np.ndarray, n: int) -> int:
    """Number of directed walks with ``n`` edges."""
    a = np.asarray(adjacency, dtype=np.int64)
    return int(np.linalg.matrix_power(a, n).sum())


def binary_matrices(n: int):
    yield from binary_matrices_rows(n, n)


def binary_matrices_rows(n: int, rows: int):
    """All ``{0,1}`` matrices with ``rows`` rows and ``n`` columns."""
    for bits in itertools.product((0, 1), repeat=rows * n):
        yield np.array(bits, dtype=np.int64).reshape(rows, n)


@dataclass(frozen=True)
class EnumerationResult:
    n: int
    total: int
    certified: int
    worst_residual: float
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return self.certified == self.total


def exhaustive_binary_idempotents(n: int, tol: float = 1e-9) -> EnumerationResult:
    """Compare ``A ⋆ A`` (normalized) with the entrywise square for every ``{0,1}`` matrix.

    A matrix counts as certified when ``A ⋆ A = A`` within ``tol``; the zero
    matrix is included, so the count for ``n`` is ``2^(n²)``.
    """
    if not 1 <= n <= 4:
        raise ValueError("exhaustive enumeration is limited to 1 <= n <= 4")
    from .graph import schur_normalized
    qset = classical_qset(n)
    total = certified = 0
    worst = 0.0
    failures = []
    for a in binary_matrices(n):
        total += 1
        op = qset.operator(a)
        sq = schur_normalized(qset, op, op).matrix
        res = float(np.abs(sq - entrywise_schur(a, a)).max() + np.abs(entrywise_schur(a, a) - a).max())
        worst = max(worst, res)
        if res < tol:
            certified += 1
        else:
            failures.append(a.tolist())
    return EnumerationResult(n, total, certified, worst, tuple(failures))


def mn_fourier_oracle(weights, t: np.ndarray) -> np.ndarray:
    """Index formula for F₂ on ``M_N`` with ``W = diag(q)``.

    ``F[(iρ), (ηκ)] = δ Σ_a (q_a q_i)^{1/2} T^{iρ, ηκ}_{ii, aa}`` where
    ``T^{λρ, μν}_{γθ, ζσ}`` is the coefficient of ``u_λρ ⊗ ū_μν`` in
    ``T(u_γθ ⊗ ū_ζσ)``.
    """
    q = np.asarray(weights, dtype=float)
    n = len(q)
    d = n * n
    delta = np.sqrt(np.sum(1.0 / q))
    t = np.asarray(t).reshape(d, d, d, d)
    out = np.zeros((d, d), dtype=complex)
    for i in range(n):
        for rho in range(n):
            for eta in range(n):
                for kappa in range(n):
                    acc = 0j
                    for a in range(n):
                        acc += np.sqrt(q[a] * q[i]) * t[i * n + rho, eta * n + kappa,
                                                        i * n + i, a * n + a]
                    out[i * n + rho, eta * n + kappa] = delta * acc
    return out


def cn_fourier_oracle(weights, t: np.ndarray) -> np.ndarray:
    """Index formula for F₂ on ``C^N`` with the free index read as ``μ = η``.

    ``F[ℓ, η] = δ Σ_α (q_α q_ℓ)^{1/2} T^{ℓη}_{ℓα}``.
    """
    q = np.asarray(weights, dtype=float)
    n = len(q)
    delta = np.sqrt(_fitted_delta_sq(q))
    t = np.asarray(t).reshape(n, n, n, n)
    out = np.zeros((n, n), dtype=complex)
    for ell in range(n):
        for eta in range(n):
            out[ell, eta] = delta * sum(np.sqrt(q[al] * q[ell]) * t[ell, eta, ell, al]
                                        for al in range(n))
    return out


def _fitted_delta_sq(q: np.ndarray) -> float:
    # one-dimensional blocks: the fitted scalar is the mean of the q_l^{-1}
    return float(np.mean(1.0 / q))


def classical_jones_oracle(weights) -> np.ndarray:
    """``e`` in the basis ``q_l^{-1/2} δ_l``: entries ``√(q_i q_j)``."""
    q = np.sqrt(np.asarray(weights, dtype=float))
    return np.outer(q, q)


# -- constructors -------------------------------------------------------------------

def classical_graph(weights, adjacency) -> QuantumGraph:
    """Graph on ``(C^N, q)`` from a ``{0,1}`` matrix, certified with the normalized product.

    An integer ``weights`` means uniform weights. The adjacency operator is
    ``δ² Q^{1/2} A Q^{1/2}`` in the Pimsner–Popa basis, which is ``A`` itself when
    the weights are uniform.
    """
    a = np.asarray(adjacency)
    if not np.isin(a, (0, 1)).all():
        raise ValueError("classical adjacency matrices must have entries in {0, 1}")
    n = a.shape[0]
    if np.isscalar(weights):
        if int(weights) != n:
            raise ValueError("vertex count does not match the adjacency matrix")
        q = np.full(n, 1.0 / n)
    else:
        q = np.asarray(weights, dtype=float)
        if q.shape != (n,):
            raise ValueError("one weight per vertex is required")
    uniform = np.allclose(q, q[0])
    qset = classical_qset(q, require_delta_form=uniform)
    root = np.sqrt(q)
    t = qset.delta_sq * root[:, None] * a * root[None, :]
    return make_graph(qset, t, "normalized")


def m2_adjacencies(q1: float) -> list[np.ndarray]:
    """The four adjacency matrices on ``(M₂, diag(q₁, q₂))`` in the basis ``u11, u12, u21, u22``."""
    if not 0 < q1 < 1:
        raise ValueError("q1 must lie strictly between 0 and 1")
    q2 = 1.0 - q1
    r = (q1 * q2) ** -0.5
    a1 = np.eye(4)
    a2 = np.diag([1 / q2, 0, 0, 1 / q1])
    a3 = np.eye(4)
    a3[0, 3] = a3[3, 0] = r
    a4 = a2.copy()
    a4[0, 3] = a4[3, 0] = r
    return [a1, a2, a3, a4]


def m2_family(q1: float) -> list[QuantumGraph]:
    qset = matrix_qset([q1, 1.0 - q1])
    return [make_graph(qset, a, "normalized") for a in m2_adjacencies(q1)]


def _hh_unit(d: int, k: int, ell: int) -> np.ndarray:
    """``|u_k⟩⟨u_k| ⊗ |ū_l⟩⟨ū_l|`` on ``H⊗Hbar``."""
    p = np.zeros((d * d, d * d))
    p[k * d + ell, k * d + ell] = 1.0
    return p


@dataclass(frozen=True)
class Preimage:
    """``target = scalar · F₂(operator)`` as printed, plus the scalar that makes it hold."""

    target: np.ndarray
    operator: np.ndarray
    printed_scalar: float
    fitted_scalar: float


def m2_preimages(q1: float) -> dict[str, Preimage]:
    """The explicit ∘-idempotents offered as preimages of Â₂ and Â₃."""
    from .fourier import fourier
    qset = matrix_qset([q1, 1.0 - q1])
    q2 = 1.0 - q1
    d, delta = qset.dim, qset.delta
    a = m2_adjacencies(q1)
    out = {}
    p2 = _hh_unit(d, 0, 0) + _hh_unit(d, 3, 3)
    du = qset.duality
    cc = du.coev.matrix @ du.coev_dagger.matrix
    p3 = cc / delta + _hh_unit(d, 0, 3) + _hh_unit(d, 3, 0)
    for name, p, target, printed in (("A2", p2, a[1], 1.0 / (delta * q1 * q2)),
                                     ("A3", p3, a[2], 1.0)):
        f = fourier(qset, p, require_bimodular=False).matrix
        fitted = float((np.vdot(f, target) / np.vdot(f, f)).real)
        out[name] = Preimage(target, p, printed, fitted)
    return out


C6_PRINTED = {
    "2c": np.kron(np.eye(3), np.ones((2, 2))),
    "3d": np.kron(np.eye(2), np.ones((3, 3))),
    "6e": np.ones((6, 6)),
}


def c6_biprojections() -> dict[str, np.ndarray]:
    """The projections ``c``, ``d``, ``e`` on uniform ``C^6`` from the printed multiples."""
    return {"c": C6_PRINTED["2c"] / 2, "d": C6_PRINTED["3d"] / 3, "e": C6_PRINTED["6e"] / 6}


# -- registry -------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogItem:
    graph: QuantumGraph
    expected_scalar: float
    expected_flags: dict


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    build: Callable[[], CatalogItem] = field(repr=False)

    def load(self, verify: bool = True) -> CatalogItem:
        item = self.build()
        if verify:
            problems = check_item(item)
            if problems:
                raise AssertionError(f"catalog entry {self.name} failed: {problems}")
        return item


def check_item(item: CatalogItem, tol: float = 1e-9) -> list[str]:
    problems = []
    g = item.graph
    if abs(g.idem_scalar - item.expected_scalar) > tol * max(1.0, item.expected_scalar):
        problems.append(f"scalar {g.idem_scalar} != {item.expected_scalar}")
    flags = g.flags
    for key, want in item.expected_flags.items():
        have = getattr(flags, key)
        if have != want:
            problems.append(f"{key}: {have} != {want}")
    if flags.real != flags.cp:
        problems.append("real and completely positive disagree")
    return problems


def _classical(n, adjacency, flags, weights=None):
    def build():
        g = classical_graph(n if weights is None else weights, adjacency)
        return CatalogItem(g, 1.0, flags)
    return build


def _undirected(refl):
    return {"self_adjoint": True, "real": True, "cp": True, "reflexive_class": refl}


def _m2(q1, k):
    def build():
        return CatalogItem(m2_family(q1)[k], 1.0, _undirected("reflexive"))
    return build


def _c6(name):
    def build():
        qset = classical_qset(6)
        p = c6_biprojections()[name]
        scalar = {"c": 0.5, "d": 1 / 3, "e": 1 / 6}[name]
        return CatalogItem(make_graph(qset, p, "normalized"), scalar, _undirected("reflexive"))
    return build


def _qset_graph(qset_fn, kind):
    def build():
        qset = qset_fn()
        g = complete_graph(qset) if kind == "complete" else trivial_graph(qset)
        return CatalogItem(g, 1.0, _undirected("reflexive"))
    return build


def _cyclic4_dual():
    grp = cyclic(4)
    ch = characters(grp)
    p = character_idempotent(grp, ch[1]) + character_idempotent(grp, ch[3])
    g = quantum_cayley_graph(grp, p)
    return CatalogItem(g, 1.0, _undirected("neither"))


def _s3_sign_block():
    grp = symmetric3()
    p = central_idempotents(grp)[1]
    g = quantum_cayley_graph(group_algebra_qset(grp), p)
    return CatalogItem(g, 1.0, _undirected("neither"))


def _s3_trivial():
    grp = symmetric3()
    g = quantum_cayley_graph(group_algebra_qset(grp), point_mass(grp, grp.identity))
    return CatalogItem(g, 1.0, _undirected("reflexive"))


_CYCLE4 = np.roll(np.eye(4, dtype=int), 1, axis=0) + np.roll(np.eye(4, dtype=int), -1, axis=0)

ENTRIES: tuple[CatalogEntry, ...] = (
    CatalogEntry("classical-complete-3", "all-ones matrix on uniform C^3",
                 _classical(3, np.ones((3, 3), int), _undirected("reflexive"))),
    CatalogEntry("classical-trivial-3", "identity matrix on uniform C^3",
                 _classical(3, np.eye(3, dtype=int), _undirected("reflexive"))),
    CatalogEntry("classical-cycle-4", "undirected 4-cycle on uniform C^4",
                 _classical(4, _CYCLE4, _undirected("irreflexive"))),
    CatalogEntry("classical-directed-edge-2", "single directed edge 1 -> 2 on uniform C^2",
                 _classical(2, np.array([[0, 0], [1, 0]]),
                            {"self_adjoint": False, "real": True, "reflexive_class": "irreflexive"})),
    CatalogEntry("classical-complete-weighted-3", "complete graph on C^3 with weights 1/6, 1/3, 1/2",
                 _classical(3, np.ones((3, 3), int), {"self_adjoint": True, "real": True},
                            weights=[1 / 6, 1 / 3, 1 / 2])),
    *(CatalogEntry(f"m2-A{k + 1}-q{tag}", f"M2 family member {k + 1} with q1 = {tag.replace('_', '/')}",
                   _m2(q1, k))
      for tag, q1 in (("1_2", 0.5), ("1_3", 1 / 3)) for k in range(4)),
    *(CatalogEntry(f"c6-{name}", f"biprojection {name} on uniform C^6", _c6(name))
      for name in ("c", "d", "e")),
    CatalogEntry("m3-complete", "complete graph on (M3, tr)",
                 _qset_graph(lambda: matrix_qset(3), "complete")),
    CatalogEntry("m2-trivial-nontracial", "trivial graph on (M2, diag(1/3, 2/3))",
                 _qset_graph(lambda: matrix_qset([1 / 3, 2 / 3]), "trivial")),
    CatalogEntry("m2m1-complete", "complete graph on M2 + C with its tracial delta-form",
                 _qset_graph(lambda: tracial_qset([2, 1]), "complete")),
    CatalogEntry("cyclic4-dual", "quantum Cayley graph of Z/4 from two character idempotents",
                 _cyclic4_dual),
    CatalogEntry("s3-sign", "quantum Cayley graph of S3 from the sign central idempotent",
                 _s3_sign_block),
    CatalogEntry("s3-trivial", "quantum Cayley graph of S3 from the identity point mass",
                 _s3_trivial),
)

REGISTRY: dict[str, CatalogEntry] = {e.name: e for e in ENTRIES}


def names() -> list[str]:
    return [e.name for e in ENTRIES]


def load(name: str, verify: bool = True) -> CatalogItem:
    try:
        entry = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}") from None
    return entry.load(verify)
