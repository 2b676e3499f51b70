"""Numerical tolerances shared across the package."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    eq: float = 1e-9
    faithful: float = 1e-12
    gram: float = 1e-10
    commutant: float = 1e-9
    rank: float = 1e-7

    def with_eq(self, eq: float) -> "Tolerances":
        return replace(self, eq=eq)


DEFAULT = Tolerances()


def from_env(default: float | None = None) -> Tolerances:
    """Default tolerances, with ``QGRAPH_TOL`` overriding the equality tolerance."""
    raw = os.environ.get("QGRAPH_TOL")
    if raw:
        return DEFAULT.with_eq(float(raw))
    if default is not None:
        return DEFAULT.with_eq(default)
    return DEFAULT
