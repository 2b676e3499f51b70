"""JSON encodings for quantum sets, operators, graphs and groups.

Complex numbers are two-element ``[re, im]`` arrays and matrices are row-major
nested lists.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .graph import PRODUCTS, QuantumGraph, QuantumSet, density_qset, make_graph
from .groups import FiniteGroup, cyclic, from_table, symmetric3
from .linop import LEG_TAGS, LinearOperator


class SchemaError(ValueError):
    """Well-formed JSON that does not match the expected schema."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def _clean(x: float) -> float:
    # twelve significant digits keep reports stable across BLAS code paths
    x = float(f"{float(x):.12g}")
    return 0.0 if x == 0 else x


def encode_matrix(mat) -> list:
    mat = np.asarray(mat)
    return [[encode_complex(z) for z in row] for row in mat]


def decode_matrix(obj: Any, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(path, "expected a nonempty list of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise SchemaError(f"{path}[{i}]", "expected a row list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"{path}[{i}]", "ragged matrix")
        vals = []
        for j, z in enumerate(row):
            if (isinstance(z, list) and len(z) == 2
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                vals.append(complex(z[0], z[1]))
            elif isinstance(z, (int, float)) and not isinstance(z, bool):
                vals.append(complex(z))
            else:
                raise SchemaError(f"{path}[{i}][{j}]", "expected [re, im] or a real number")
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(path, f"missing key {key!r}")
    return obj[key]


# -- quantum sets ---------------------------------------------------------------------

def encode_qset(qset: QuantumSet) -> dict:
    out = {"blocks": list(qset.algebra.block_dims),
           "state": {"blocks": [encode_matrix(w) for w in qset.state.density_blocks]}}
    if not qset.is_delta_form:
        out["require_delta_form"] = False
    return out


def decode_qset(obj: Any, path: str = "$") -> QuantumSet:
    blocks = _require(obj, "blocks", path)
    if not isinstance(blocks, list) or not all(isinstance(b, int) and not isinstance(b, bool)
                                               for b in blocks):
        raise SchemaError(f"{path}.blocks", "expected a list of integers")
    state = _require(obj, "state", path)
    dens = _require(state, "blocks", f"{path}.state")
    if not isinstance(dens, list):
        raise SchemaError(f"{path}.state.blocks", "expected a list of matrices")
    mats = [decode_matrix(m, f"{path}.state.blocks[{i}]") for i, m in enumerate(dens)]
    require = obj.get("require_delta_form", True)
    if not isinstance(require, bool):
        raise SchemaError(f"{path}.require_delta_form", "expected a boolean")
    return density_qset(blocks, mats, require_delta_form=require)


# -- operators -------------------------------------------------------------------------

def encode_operator(op: LinearOperator) -> dict:
    return {"domain": list(op.domain), "codomain": list(op.codomain),
            "matrix": encode_matrix(op.matrix)}


def decode_operator(obj: Any, dim: int, path: str = "$") -> LinearOperator:
    legs = {}
    for key in ("domain", "codomain"):
        tags = _require(obj, key, path)
        if not isinstance(tags, list) or any(t not in LEG_TAGS for t in tags):
            raise SchemaError(f"{path}.{key}", f"expected a list of tags from {LEG_TAGS}")
        legs[key] = tuple(tags)
    mat = decode_matrix(_require(obj, "matrix", path), f"{path}.matrix")
    try:
        return LinearOperator(mat, legs["domain"], legs["codomain"], dim)
    except ValueError as exc:
        raise SchemaError(f"{path}.matrix", str(exc)) from None


# -- graphs ----------------------------------------------------------------------------

def encode_graph(g: QuantumGraph) -> dict:
    return {"qset": encode_qset(g.qset), "adjacency": encode_operator(g.adjacency),
            "product": g.product}


def decode_graph_parts(obj: Any, path: str = "$") -> tuple[QuantumSet, LinearOperator, str]:
    """Quantum set, adjacency and product name, without certifying."""
    qset = decode_qset(_require(obj, "qset", path), f"{path}.qset")
    op = decode_operator(_require(obj, "adjacency", path), qset.dim, f"{path}.adjacency")
    product = obj.get("product", "normalized")
    if product not in PRODUCTS:
        raise SchemaError(f"{path}.product", f"expected one of {PRODUCTS}")
    return qset, op, product


def decode_graph(obj: Any, path: str = "$") -> QuantumGraph:
    qset, op, product = decode_graph_parts(obj, path)
    return make_graph(qset, op, product)


# -- groups ----------------------------------------------------------------------------

def encode_group(group: FiniteGroup) -> dict:
    return {"order": group.order, "table": group.table.tolist()}


def decode_group(obj: Any, path: str = "$") -> FiniteGroup:
    """``{"order", "table"}``, or ``{"builtin": "symmetric3" | "cyclic", "order": n}``."""
    if isinstance(obj, dict) and "builtin" in obj:
        name = obj["builtin"]
        if name == "symmetric3":
            return symmetric3()
        if name == "cyclic":
            order = _require(obj, "order", path)
            if not isinstance(order, int) or order < 1:
                raise SchemaError(f"{path}.order", "expected a positive integer")
            return cyclic(order)
        raise SchemaError(f"{path}.builtin", f"unknown builtin group {name!r}")
    order = _require(obj, "order", path)
    table = _require(obj, "table", path)
    if not isinstance(order, int) or not isinstance(table, list) or len(table) != order:
        raise SchemaError(f"{path}.table", "expected an order x order integer table")
    for i, row in enumerate(table):
        if not isinstance(row, list) or len(row) != order or not all(isinstance(v, int)
                                                                     for v in row):
            raise SchemaError(f"{path}.table[{i}]", "expected a row of integers")
    return from_table(table)
