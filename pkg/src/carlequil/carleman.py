"""Truncated Carleman lifting of polynomial vector fields.

The lifted state stacks ``y = (y_0, y_1, ..., y_P)`` with ``y_p = u^(x)p``
(row-major Kronecker ordering, ``y_0 = 1``).  Block row ``p`` of the lifted
operator is ``sum_k C(F_k, p) y_{p+k-1}`` where ``C(F, p)`` places ``F`` in each
of the ``p`` tensor slots.  Blocks with index above ``P`` are dropped, or
replaced by a closure correction (see :mod:`carlequil.psc`).

Everything is matrix-free except :func:`assemble_dense`, which is capped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .polysys import PolyField

__all__ = [
    "LiftedSystem",
    "lifted_dimension",
    "field_matrix",
    "lift_state",
    "apply_cfp",
    "apply_cfp_transpose",
    "lifted_matvec",
    "lifted_rmatvec",
    "assemble_dense",
    "DimensionCapError",
]

TensorForm = Literal["sorted", "symmetric"]

DEFAULT_DENSE_CAP = 4096


class DimensionCapError(ValueError):
    """Dense assembly requested above the configured dimension cap."""


def lifted_dimension(n: int, order: int) -> int:
    """``1 + sum_{p=1..P} N^p``."""
    return 1 + sum(n**p for p in range(1, order + 1))


def field_matrix(f: PolyField, k: int, form: TensorForm = "sorted") -> sp.csr_matrix:
    """Degree-``k`` coefficient table of ``f`` as a sparse ``N x N^k`` matrix.

    ``"sorted"`` puts each coefficient on the ascending index tuple only.
    ``"symmetric"`` spreads it evenly over all distinct permutations, which is
    the minimum-norm representative acting identically on symmetric tensors.
    """
    n = f.dimension
    rows, cols, vals = [], [], []
    shape = (n,) * k
    for (row, idx), c in f.table(k).items():
        if form == "sorted" or k < 2:
            perms = [idx]
        elif form == "symmetric":
            perms = sorted(set(itertools.permutations(idx)))
        else:
            raise ValueError(f"unknown tensor form {form!r}")
        for perm in perms:
            rows.append(row)
            cols.append(int(np.ravel_multi_index(perm, shape)) if k else 0)
            vals.append(c / len(perms))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n**k))


@dataclass(frozen=True)
class LiftedSystem:
    """Truncated lifting of ``field`` to order ``order``.

    ``correction`` is an optional dense ``dim x dim`` matrix added to the
    operator; the PSC closure uses it to rewrite the top rows.
    """

    field: PolyField
    order: int
    form: TensorForm = "sorted"
    correction: np.ndarray | None = None
    closure: str = "carleman"
    pivot: float | None = None
    _mats: dict = dc_field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("truncation order P must be >= 1")
        for k in self.field.degrees:
            fk = field_matrix(self.field, k, self.form)
            self._mats[k] = fk
            self._mats[-k - 1] = fk.T.tocsr()
        if self.correction is not None and self.correction.shape != (self.dim, self.dim):
            raise ValueError("closure correction has wrong shape")

    @property
    def n(self) -> int:
        return self.field.dimension

    @property
    def dim(self) -> int:
        return lifted_dimension(self.n, self.order)

    @property
    def offsets(self) -> list[int]:
        """Start index of each block ``0..P`` plus the total length."""
        offs = [0, 1]
        for p in range(1, self.order + 1):
            offs.append(offs[-1] + self.n**p)
        return offs

    def block(self, y: np.ndarray, p: int) -> np.ndarray:
        offs = self.offsets
        return y[offs[p] : offs[p + 1]]

    def matrix(self, k: int) -> sp.csr_matrix:
        return self._mats[k]

    def matrix_t(self, k: int) -> sp.csr_matrix:
        return self._mats[-k - 1]

    def couplings(self):
        """Yield ``(p, k, q)`` for every retained block ``C(F_k, p)`` at column block ``q``."""
        for p in range(1, self.order + 1):
            for k in self.field.degrees:
                q = p + k - 1
                if q <= self.order:
                    yield p, k, q

    def matvec(self, y: np.ndarray) -> np.ndarray:
        return lifted_matvec(self, y)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return lifted_rmatvec(self, y)


def lift_state(u, order: int) -> np.ndarray:
    """Stack ``1, u, u(x)u, ..., u^(x)P``."""
    if order < 1:
        raise ValueError("truncation order P must be >= 1")
    u = np.asarray(u, dtype=float).reshape(-1)
    parts = [np.ones(1)]
    cur = np.ones(1)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(order):
            cur = np.kron(cur, u)
            parts.append(cur)
    y = np.concatenate(parts)
    if not np.all(np.isfinite(y)):
        raise OverflowError("tensor powers of the state overflow double precision")
    return y


def _slot_shapes(n: int, p: int, k: int):
    for v in range(p):
        yield n**v, n**k, n ** (p - 1 - v)


def apply_cfp(fk: sp.spmatrix, p: int, x: np.ndarray, n: int, k: int | None = None) -> np.ndarray:
    """Apply ``C(F_k, p) = sum_v I^(x)v (x) F_k (x) I^(x)(p-1-v)`` to ``x``.

    ``fk`` is ``N x N^k``; ``x`` has length ``N^(p-1+k)``.  Each slot is handled
    by a reshape and one sparse product, so no Kronecker factor is built.
    ``k`` is inferred from the shape of ``fk`` unless given (needed when N=1).
    """
    k = _degree_of(fk.shape[1], n) if k is None else k
    x = np.asarray(x, dtype=float)
    if fk.shape[0] != n or x.shape != (n ** (p - 1 + k),):
        raise ValueError(
            f"C(F,{p}) with F of shape {fk.shape} needs a vector of length {n ** (p - 1 + k)}, "
            f"got {x.shape}"
        )
    out = np.zeros(n**p)
    for left, mid, right in _slot_shapes(n, p, k):
        t = x.reshape(left, mid, right).transpose(1, 0, 2).reshape(mid, left * right)
        r = np.asarray(fk @ t)
        out += r.reshape(n, left, right).transpose(1, 0, 2).reshape(-1)
    return out


def apply_cfp_transpose(
    fk: sp.spmatrix, p: int, x: np.ndarray, n: int, k: int | None = None, fkt=None
) -> np.ndarray:
    """Apply ``C(F_k, p)^T``; ``x`` has length ``N^p``.

    ``fkt`` may carry a precomputed ``fk.T`` in CSR form.
    """
    k = _degree_of(fk.shape[1], n) if k is None else k
    x = np.asarray(x, dtype=float)
    if x.shape != (n**p,):
        raise ValueError(f"C(F,{p})^T needs a vector of length {n**p}, got {x.shape}")
    if fkt is None:
        fkt = fk.T.tocsr()
    out = np.zeros(n ** (p - 1 + k))
    for left, mid, right in _slot_shapes(n, p, k):
        t = x.reshape(left, n, right).transpose(1, 0, 2).reshape(n, left * right)
        r = np.asarray(fkt @ t)
        out += r.reshape(mid, left, right).transpose(1, 0, 2).reshape(-1)
    return out


def _degree_of(ncols: int, n: int) -> int:
    if ncols == 1:
        return 0
    if n == 1:
        raise ValueError("degree is ambiguous for N=1; pass k explicitly")
    k = round(math.log(ncols, n))
    if n**k != ncols:
        raise ValueError(f"{ncols} columns is not a power of N={n}")
    return k


def _check(sys: LiftedSystem, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (sys.dim,):
        raise ValueError(f"lifted state must have length {sys.dim}, got {y.shape}")
    return y


def lifted_matvec(sys: LiftedSystem, y: np.ndarray) -> np.ndarray:
    """``A y`` for the truncated (and possibly closed) lifted operator."""
    y = _check(sys, y)
    out = np.zeros(sys.dim)
    offs = sys.offsets
    n = sys.n
    for p, k, q in sys.couplings():
        out[offs[p] : offs[p + 1]] += apply_cfp(sys.matrix(k), p, y[offs[q] : offs[q + 1]], n, k)
    if sys.correction is not None:
        out += sys.correction @ y
    return out


def lifted_rmatvec(sys: LiftedSystem, y: np.ndarray) -> np.ndarray:
    """``A^T y``."""
    y = _check(sys, y)
    out = np.zeros(sys.dim)
    offs = sys.offsets
    n = sys.n
    for p, k, q in sys.couplings():
        xp = y[offs[p] : offs[p + 1]]
        out[offs[q] : offs[q + 1]] += apply_cfp_transpose(sys.matrix(k), p, xp, n, k, sys.matrix_t(k))
    if sys.correction is not None:
        out += sys.correction.T @ y
    return out


def assemble_dense(sys: LiftedSystem, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense ``A`` built column by column from :func:`lifted_matvec`."""
    if sys.dim > cap:
        raise DimensionCapError(f"lifted dimension {sys.dim} exceeds dense cap {cap}")
    A = np.empty((sys.dim, sys.dim))
    e = np.zeros(sys.dim)
    for j in range(sys.dim):
        e[j] = 1.0
        A[:, j] = lifted_matvec(sys, e)
        e[j] = 0.0
    return A
