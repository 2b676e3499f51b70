"""Command-line front end: ``qgraph check | fourier | cayley | catalog | enumerate-classical``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import catalog
from .algebra import ValidationError
from .fourier import (NotBimodularError, bimodular_commutant, exchange_conventions, fourier,
                      fourier_of_identity_scalar, idempotent_transport, inverse_fourier,
                      verify_exchange)
from .graph import (DeltaFormError, IdempotencyError, NotAdjacencyError, classical_qset,
                    edge_count, edge_projector, idempotency_report, jones_projection,
                    make_graph, schur_normalized, vertex_count)
from .groups import (GroupAlgebraElement, cayley_adjacency, character_idempotent, characters,
                     group_algebra_qset, quantum_cayley_graph)
from .io import (SchemaError, _clean, decode_graph_parts, decode_group, decode_operator,
                 decode_qset, encode_complex, encode_graph, encode_operator)
from .linop import LinearOperator, ZigZagError
from .tolerances import DEFAULT, from_env

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 2."""


class Report:
    def __init__(self, command: str, seed: int, tol: float, digest: str = ""):
        self.command = command
        self.seed = seed
        self.tol = tol
        self.digest = digest
        self.checks: list[dict] = []
        self.result: dict = {}

    def check(self, name: str, ok: bool, residual=None, scalar=None, tolerance=None, **extra):
        entry = {"name": name, "status": "pass" if ok else "fail",
                 "residual": None if residual is None else _clean(residual),
                 "tolerance": self.tol if tolerance is None else tolerance}
        if scalar is not None:
            entry["scalar"] = encode_complex(scalar) if isinstance(scalar, complex) else _clean(scalar)
        entry.update(extra)
        self.checks.append(entry)
        return ok

    @property
    def ok(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def as_dict(self) -> dict:
        return {"command": self.command, "input_digest": self.digest, "seed": self.seed,
                "tolerance": self.tol, "status": "pass" if self.ok else "fail",
                "checks": self.checks, "result": self.result}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2, sort_keys=True)
        lines = [f"{self.command}: {'PASS' if self.ok else 'FAIL'}"]
        if self.digest:
            lines.append(f"  input sha256 {self.digest}")
        for c in self.checks:
            extra = ""
            if c.get("scalar") is not None:
                extra += f" scalar={c['scalar']}"
            if c.get("residual") is not None:
                extra += f" residual={c['residual']:.3e}"
            lines.append(f"  [{c['status']}] {c['name']}{extra}")
        for entry in self.result.get("entries", []):
            lines.append(f"  {entry['name']}: {entry['description']}")
        for key, val in self.result.items():
            if not isinstance(val, (list, dict)):
                lines.append(f"  {key}: {val}")
        return "\n".join(lines)


def _read_json(path: str) -> tuple[object, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno} "
                         f"(char {exc.pos}): {exc.msg}") from None
    return obj, hashlib.sha256(raw).hexdigest()


# -- subcommands ------------------------------------------------------------------------

def cmd_check(args, tol) -> Report:
    obj, digest = _read_json(args.graph)
    qset, op, product = decode_graph_parts(obj)
    rep = Report("check", args.seed, tol.eq, digest)
    cert = idempotency_report(qset, op, product, tol.eq)
    rep.check("schur_idempotent", cert.certified, cert.residual, cert.scalar.real,
              product=product)
    rep.result["delta_sq"] = _clean(qset.delta_sq)
    if not cert.certified:
        return rep
    g = make_graph(qset, op, product, tol.eq)
    flags = g.flags
    rep.result["flags"] = {"self_adjoint": flags.self_adjoint, "real": flags.real,
                           "cp": flags.cp, "reflexive_class": flags.reflexive_class}
    if flags.reflexive_scalar is not None:
        rep.result["flags"]["reflexive_scalar"] = encode_complex(flags.reflexive_scalar)
    rep.check("real_iff_cp", flags.real == flags.cp, flags.residuals["real"])
    rep.result["vertex_count"] = _clean(vertex_count(qset))
    rep.result["edge_count"] = _clean(edge_count(g))
    try:
        ep = edge_projector(g, tol.eq)
        rep.check("edge_projector", True, scalar=ep.scalar)
        rep.result["edge_projector_rank"] = ep.rank
    except IdempotencyError as exc:
        rep.check("edge_projector", False, exc.residual)
    return rep


def _parse_ranks(spec: str) -> np.ndarray:
    try:
        rows = [[int(v) for v in row.split(",")] for row in spec.replace("ranks=", "").split(";")]
        return np.array(rows, dtype=int)
    except ValueError:
        raise InputError(f"cannot parse idempotent spec {spec!r}; expected e.g. 1,0;0,1") from None


def cmd_fourier(args, tol) -> Report:
    obj, digest = _read_json(args.qset)
    qset = decode_qset(obj)
    rep = Report("fourier", args.seed, tol.eq, digest)
    s = fourier_of_identity_scalar(qset)
    rep.check("F(id) = delta e", abs(s - qset.delta) < tol.eq * max(1.0, qset.delta),
              abs(s - qset.delta), s)
    rep.result["delta"] = _clean(qset.delta)
    rep.result["commutant_dim"] = len(bimodular_commutant(qset))
    conv = exchange_conventions(qset, args.seed)
    rep.result["conventions"] = {"composition_scalar": encode_complex(conv.composition_scalar),
                                 "order": conv.order,
                                 "dagger_scalar": encode_complex(conv.dagger_scalar),
                                 "schur_scalar": encode_complex(conv.schur_scalar)}
    rng = np.random.default_rng(args.seed)
    basis = bimodular_commutant(qset)
    worst = 0.0
    for _ in range(args.samples):
        pair = []
        for _ in range(2):
            c = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
            pair.append(sum(ci * b.matrix for ci, b in zip(c, basis)))
        worst = max(worst, verify_exchange(qset, *pair).worst)
    rep.check("exchange identities", worst < 1e-8, worst, tolerance=1e-8, samples=args.samples)

    if args.op is not None:
        if args.op == "identity":
            op = LinearOperator(np.eye(qset.dim ** 2), ("H", "Hbar"), ("H", "Hbar"), qset.dim)
        else:
            op_obj, _ = _read_json(args.op)
            op = decode_operator(op_obj, qset.dim)
        if op.domain == ("H", "Hbar") and op.codomain == ("H", "Hbar"):
            try:
                out = fourier(qset, op)
            except NotBimodularError as exc:
                rep.check("bimodular input", False, exc.residual, tolerance=1e-8)
                return rep
            rep.result["direction"] = "forward"
            jp = jones_projection(qset).matrix
            ratio = np.vdot(jp, out.matrix) / np.vdot(jp, jp)
            rep.result["scalar_against_e"] = encode_complex(ratio)
        elif op.domain == ("H",) and op.codomain == ("H",):
            inv = inverse_fourier(qset, op)
            back = fourier(qset, inv)
            res = (back - op).norm() / max(1.0, op.norm())
            rep.check("round trip", res < tol.eq, res)
            rep.result["direction"] = "inverse"
            out = inv.operator
        else:
            raise InputError("operator must act on H or on H x Hbar")
        rep.result["operator"] = encode_operator(out)
    elif args.idempotent is not None:
        ranks = _parse_ranks(args.idempotent)
        try:
            g = idempotent_transport(qset, ranks, seed=args.seed, product="normalized")
        except NotAdjacencyError as exc:
            rep.check("transported idempotent certifies", False, exc.residual)
            return rep
        except ValueError as exc:
            raise InputError(str(exc)) from None
        rep.check("transported idempotent certifies", True, g.idem_residual, g.idem_scalar)
        rep.result["graph"] = encode_graph(g)
    return rep


def cmd_cayley(args, tol) -> Report:
    obj, digest = _read_json(args.group)
    group = decode_group(obj)
    try:
        subset = [int(v) for v in args.subset.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse subset {args.subset!r}") from None
    rep = Report("cayley", args.seed, tol.eq, digest)
    if not args.dual:
        adj = cayley_adjacency(group, subset)
        rep.result["adjacency"] = adj.tolist()
        rep.check("zero-one matrix", bool(np.isin(adj, (0, 1)).all()))
        return rep
    chars = characters(group)
    if any(not 0 <= s < len(chars) for s in subset):
        raise InputError("dual subset must index characters 0..n-1")
    p = GroupAlgebraElement(group, np.zeros(group.order))
    for s in subset:
        p = p + character_idempotent(group, chars[s])
    ga = group_algebra_qset(group)
    g = quantum_cayley_graph(ga, p)
    rep.check("schur_idempotent", True, g.idem_residual, g.idem_scalar)
    diag = np.zeros(group.order)
    diag[subset] = 1
    res = float(np.abs(g.adjacency.matrix - np.diag(diag)).max())
    rep.check("diagonal in the character basis", res < tol.eq, res)
    rep.result["dual_adjacency"] = np.rint(g.adjacency.matrix.real).astype(int).tolist()
    rep.result["graph"] = encode_graph(g)
    return rep


def _verify_entry(name: str) -> dict:
    try:
        item = catalog.load(name, verify=False)
    except Exception as exc:  # reported, not raised: one broken entry must not hide others
        return {"name": name, "problems": [f"construction failed: {exc}"]}
    problems = catalog.check_item(item)
    return {"name": name, "problems": problems, "scalar": _clean(item.graph.idem_scalar),
            "residual": _clean(item.graph.idem_residual)}


def _map(fn, items, parallel: int):
    if parallel and parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_catalog(args, tol) -> Report:
    rep = Report(f"catalog {args.action}", args.seed, tol.eq)
    if args.action == "list":
        rep.result["entries"] = [{"name": e.name, "description": e.description}
                                 for e in catalog.ENTRIES]
        return rep
    if args.action == "emit":
        if not args.name:
            raise InputError("catalog emit needs an entry name")
        try:
            item = catalog.load(args.name)
        except KeyError as exc:
            raise InputError(str(exc)) from None
        rep.result["graph"] = encode_graph(item.graph)
        rep.check("self-verification", True, item.graph.idem_residual, item.graph.idem_scalar)
        return rep
    for out in _map(_verify_entry, catalog.names(), args.parallel):
        rep.check(out["name"], not out["problems"], out.get("residual"), out.get("scalar"),
                  problems=out["problems"])
    return rep


def _enumerate_chunk(job: tuple[int, int]) -> tuple[int, int, float]:
    n, first_row = job
    qset = classical_qset(n)
    total = ok = 0
    worst = 0.0
    row0 = np.array([(first_row >> (n - 1 - k)) & 1 for k in range(n)])
    for rest in catalog.binary_matrices_rows(n, n - 1):
        a = np.vstack([row0[None, :], rest]) if n > 1 else row0[None, :]
        op = qset.operator(a)
        res = float(np.abs(schur_normalized(qset, op, op).matrix - catalog.entrywise_schur(a, a)).max())
        total += 1
        worst = max(worst, res)
        ok += res < 1e-9
    return total, ok, worst


def cmd_enumerate(args, tol) -> Report:
    n = args.n
    if not 1 <= n <= 4:
        raise InputError("enumerate-classical supports 1 <= N <= 4")
    rep = Report("enumerate-classical", args.seed, tol.eq)
    results = _map(_enumerate_chunk, [(n, r) for r in range(2 ** n)], args.parallel)
    total = sum(r[0] for r in results)
    ok = sum(r[1] for r in results)
    worst = max(r[2] for r in results)
    rep.result["certified"] = f"{ok}/{total}"
    rep.check("all {0,1} matrices are normalized Schur idempotents", ok == total, worst,
              1.0, tolerance=1e-9)
    return rep


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                        help="equality tolerance (default 1e-9, or QGRAPH_TOL)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--parallel", type=int, default=argparse.SUPPRESS,
                        help="worker processes for independent checks")

    parser = argparse.ArgumentParser(prog="qgraph", parents=[common],
                                     description="Certify quantum graphs and quantum Fourier transforms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="certify a graph JSON file")
    p.add_argument("graph")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fourier", parents=[common], help="apply F2 or its inverse")
    p.add_argument("qset")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--op", help="operator JSON file, or 'identity'")
    grp.add_argument("--idempotent", help="commutant block ranks, e.g. 1,0;0,1")
    p.add_argument("--samples", type=int, default=5, help="random pairs for the exchange check")
    p.set_defaults(func=cmd_fourier)

    p = sub.add_parser("cayley", parents=[common], help="classical or dual Cayley adjacency")
    p.add_argument("group")
    p.add_argument("--subset", required=True)
    p.add_argument("--dual", action="store_true")
    p.set_defaults(func=cmd_cayley)

    p = sub.add_parser("catalog", parents=[common], help="built-in examples")
    p.add_argument("action", choices=("list", "emit", "verify-all"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("enumerate-classical", parents=[common],
                       help="exhaustive {0,1} idempotent check")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = getattr(args, "seed", 0)
    args.format = getattr(args, "format", "json")
    args.parallel = getattr(args, "parallel", 1)
    tol = DEFAULT.with_eq(args.tol) if hasattr(args, "tol") else from_env()
    start = time.perf_counter()
    try:
        rep = args.func(args, tol)
    except (InputError, SchemaError, ValidationError, DeltaFormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ZigZagError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (NotAdjacencyError, NotBimodularError, IdempotencyError) as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(rep.render(args.format))
    print(f"wall time {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
