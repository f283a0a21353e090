"""Pivot-switching closure for scalar Carleman systems.

Plain truncation drops every power ``y_q`` with ``q > P``.  The pivot closure
instead replaces ``x**q`` by its degree-``P`` Taylor polynomial about a pivot
``s``, so only the rows that referenced a dropped power change.  With ``s = 0``
the Taylor polynomial of ``x**q`` vanishes and the plain truncation is
recovered exactly.

For the cubic spring (``F_0 = b, F_1 = -k, F_3 = -a``, ``P = 5``) the closure
gives rows

    p=4: ( 4as^6, -24as^5,  60as^4, 4b-80as^3, -4k+60as^2,    -24as  )
    p=5: (30as^7, -175as^6, 420as^5,  -525as^4, 5b+350as^3, -5k-105as^2)

Every entry carries a factor ``a`` and the powers of ``s`` fall by one per
column, as required by dimensional consistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .carleman import LiftedSystem, field_matrix
from .polysys import PolyField

__all__ = ["PivotClosure", "taylor_closure", "pivot_closure", "psc_assemble", "DEFAULT_PIVOT"]

DEFAULT_PIVOT = 0.01


def taylor_closure(q: int, order: int, s: float) -> np.ndarray:
    """Coefficients ``c`` with ``x**q ~= sum_m c[m] x**m`` (degree-``order`` Taylor about ``s``)."""
    if not q > order >= 1:
        raise ValueError(f"closure needs q > P >= 1, got q={q}, P={order}")
    c = np.zeros(order + 1)
    # x^q = sum_j C(q,j) s^(q-j) (x-s)^j, keep j <= P, then expand (x-s)^j
    for j in range(order + 1):
        outer = comb(q, j) * s ** (q - j)
        for m in range(j + 1):
            c[m] += outer * comb(j, m) * (-s) ** (j - m)
    return c


@dataclass(frozen=True)
class PivotClosure:
    pivot: float
    order: int
    coefficients: dict[int, np.ndarray]

    def __post_init__(self):
        for q, c in self.coefficients.items():
            if q <= self.order or c.shape != (self.order + 1,):
                raise ValueError(f"bad closure vector for power {q}")


def pivot_closure(f: PolyField, order: int, s: float) -> PivotClosure:
    needed = {p + k - 1 for p in range(1, order + 1) for k in f.degrees if p + k - 1 > order}
    return PivotClosure(s, order, {q: taylor_closure(q, order, s) for q in sorted(needed)})


def psc_assemble(f: PolyField, order: int = 5, s: float = DEFAULT_PIVOT) -> LiftedSystem:
    """Lift a scalar field with the pivot closure applied to the top rows."""
    if f.dimension != 1:
        raise ValueError("pivot-switching closure is implemented for scalar (D=1) fields only")
    closure = pivot_closure(f, order, s)
    corr = np.zeros((order + 1, order + 1))
    for k in f.degrees:
        fk = field_matrix(f, k).toarray()[0, 0]
        for p in range(1, order + 1):
            q = p + k - 1
            if q > order:
                corr[p, :] += p * fk * closure.coefficients[q]
    return LiftedSystem(f, order, correction=corr, closure="psc", pivot=float(s))
