"""Sparse multivariate polynomials, polynomial vector fields and gradient flows.

A :class:`Polynomial` stores its terms as a mapping from a canonical exponent
key (a tuple of ``(variable, exponent)`` pairs with ascending variable index and
positive exponents) to a float coefficient.  A :class:`PolyField` stores the
right-hand side of ``du/dt = sum_k F_k u^(x)k`` as one sparse table per degree,
each entry addressed by ``(row, sorted index tuple)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Monomial",
    "Polynomial",
    "PolyField",
    "gradient",
    "hessian",
    "flow_from_potential",
    "eval_field",
]

ExpKey = tuple[tuple[int, int], ...]


def _canonical(exponents: Mapping[int, int] | Iterable[tuple[int, int]]) -> ExpKey:
    items = exponents.items() if isinstance(exponents, Mapping) else exponents
    acc: dict[int, int] = {}
    for var, e in items:
        if e < 0:
            raise ValueError(f"negative exponent {e} for variable {var}")
        if e:
            acc[int(var)] = acc.get(int(var), 0) + int(e)
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class Monomial:
    """A single term ``coefficient * prod_i u_i**e_i``."""

    exponents: ExpKey
    coefficient: float

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def index_tuple(self) -> tuple[int, ...]:
        """Variables repeated by multiplicity, ascending (``u0^2 u3`` -> ``(0, 0, 3)``)."""
        return tuple(v for v, e in self.exponents for _ in range(e))


class Polynomial:
    """Real polynomial in ``dimension`` variables with merged terms.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    def __init__(self, dimension: int, terms: Mapping[ExpKey, float] | None = None):
        if dimension < 1:
            raise ValueError("polynomial dimension must be >= 1")
        self.dimension = int(dimension)
        merged: dict[ExpKey, float] = {}
        for key, c in (terms or {}).items():
            key = _canonical(key)
            for var, _ in key:
                if not 0 <= var < self.dimension:
                    raise ValueError(f"variable index {var} out of range for D={dimension}")
            merged[key] = merged.get(key, 0.0) + float(c)
        self._terms = {k: c for k, c in merged.items() if c != 0.0}

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, dimension: int, value: float) -> "Polynomial":
        return cls(dimension, {(): value})

    @classmethod
    def variable(cls, dimension: int, index: int, coefficient: float = 1.0) -> "Polynomial":
        return cls(dimension, {((index, 1),): coefficient})

    @classmethod
    def from_monomials(cls, dimension: int, monomials: Iterable[Monomial]) -> "Polynomial":
        terms: dict[ExpKey, float] = {}
        for m in monomials:
            key = _canonical(m.exponents)
            terms[key] = terms.get(key, 0.0) + m.coefficient
        return cls(dimension, terms)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[ExpKey, float]:
        return dict(self._terms)

    def monomials(self) -> Iterator[Monomial]:
        for key in sorted(self._terms):
            yield Monomial(key, self._terms[key])

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in k) for k in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exponents: Mapping[int, int] | Iterable[tuple[int, int]]) -> float:
        return self._terms.get(_canonical(exponents), 0.0)

    def __repr__(self) -> str:
        if not self._terms:
            return f"Polynomial(D={self.dimension}, 0)"
        parts = []
        for key in sorted(self._terms, key=lambda k: (sum(e for _, e in k), k)):
            mono = "*".join(f"u{v}" + (f"^{e}" if e > 1 else "") for v, e in key) or "1"
            parts.append(f"{self._terms[key]:+.6g}*{mono}")
        return f"Polynomial(D={self.dimension}, {' '.join(parts)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dimension == other.dimension and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.dimension, frozenset(self._terms.items())))

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dimension != self.dimension:
                raise ValueError("dimension mismatch in polynomial arithmetic")
            return other
        return Polynomial.constant(self.dimension, float(other))

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return Polynomial(self.dimension, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dimension, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            s = float(other)
            return Polynomial(self.dimension, {k: s * c for k, c in self._terms.items()})
        other = self._coerce(other)
        terms: dict[ExpKey, float] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                key = _canonical(list(k1) + list(k2))
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return Polynomial(self.dimension, terms)

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "Polynomial":
        return self * (1.0 / float(other))

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0 or int(n) != n:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(self.dimension, 1.0)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, var: int) -> "Polynomial":
        terms: dict[ExpKey, float] = {}
        for key, c in self._terms.items():
            exps = dict(key)
            e = exps.get(var, 0)
            if e == 0:
                continue
            exps[var] = e - 1
            nk = _canonical(exps)
            terms[nk] = terms.get(nk, 0.0) + c * e
        return Polynomial(self.dimension, terms)

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def _compiled(self) -> tuple[np.ndarray, np.ndarray]:
        keys = list(self._terms)
        E = np.zeros((len(keys), self.dimension), dtype=np.int64)
        for r, key in enumerate(keys):
            for var, e in key:
                E[r, var] = e
        coeffs = np.array([self._terms[k] for k in keys], dtype=float)
        return E, coeffs

    def __call__(self, u: Sequence[float] | np.ndarray) -> float:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != self.dimension:
            raise ValueError(f"expected state of length {self.dimension}, got {u.shape[0]}")
        E, coeffs = self._compiled
        if coeffs.size == 0:
            return 0.0
        return float(coeffs @ np.prod(u[None, :] ** E, axis=1))


def gradient(p: Polynomial) -> list[Polynomial]:
    """Exact gradient, one polynomial per variable."""
    return [p.derivative(i) for i in range(p.dimension)]


def hessian(p: Polynomial) -> list[list[Polynomial]]:
    grad = gradient(p)
    return [[g.derivative(j) for j in range(p.dimension)] for g in grad]


class PolyField:
    """Polynomial vector field ``du/dt = sum_k F_k u^(x)k``.

    ``tables[k]`` maps ``(row, idx)`` to a coefficient where ``idx`` is a
    sorted tuple of ``k`` variable indices.  The sorted tuple is the single
    representative column used for the monomial ``prod_j u[idx_j]``.
    ``potential`` is kept when the field was derived from one.
    """

    def __init__(
        self,
        dimension: int,
        tables: Mapping[int, Mapping[tuple[int, tuple[int, ...]], float]],
        potential: Polynomial | None = None,
    ):
        if dimension < 1:
            raise ValueError("field dimension must be >= 1")
        self.dimension = int(dimension)
        clean: dict[int, dict[tuple[int, tuple[int, ...]], float]] = {}
        for k, table in tables.items():
            k = int(k)
            merged: dict[tuple[int, tuple[int, ...]], float] = {}
            for (row, idx), c in table.items():
                idx = tuple(sorted(int(i) for i in idx))
                if len(idx) != k:
                    raise ValueError(f"index tuple {idx} has length != degree {k}")
                if not 0 <= row < self.dimension or any(not 0 <= i < self.dimension for i in idx):
                    raise ValueError(f"index out of range in entry {(row, idx)}")
                merged[(int(row), idx)] = merged.get((int(row), idx), 0.0) + float(c)
            merged = {key: c for key, c in merged.items() if c != 0.0}
            if merged:
                clean[k] = merged
        self._tables = clean
        self.potential = potential

    @classmethod
    def from_components(
        cls, components: Sequence[Polynomial], potential: Polynomial | None = None
    ) -> "PolyField":
        dim = len(components)
        tables: dict[int, dict] = {}
        for row, comp in enumerate(components):
            if comp.dimension != dim:
                raise ValueError("component dimension does not match number of components")
            for mono in comp.monomials():
                idx = mono.index_tuple()
                tables.setdefault(len(idx), {})[(row, idx)] = mono.coefficient
        return cls(dim, tables, potential=potential)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted(self._tables))

    @property
    def max_degree(self) -> int:
        return max(self._tables, default=0)

    def table(self, k: int) -> dict[tuple[int, tuple[int, ...]], float]:
        return dict(self._tables.get(k, {}))

    def nnz(self, k: int) -> int:
        return len(self._tables.get(k, {}))

    def components(self) -> list[Polynomial]:
        terms: list[dict[ExpKey, float]] = [{} for _ in range(self.dimension)]
        for table in self._tables.values():
            for (row, idx), c in table.items():
                key = _canonical((i, 1) for i in idx)
                terms[row][key] = terms[row].get(key, 0.0) + c
        return [Polynomial(self.dimension, t) for t in terms]

    @cached_property
    def _compiled(self) -> list[tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
        out = []
        for k in self.degrees:
            entries = list(self._tables[k].items())
            rows = np.array([r for (r, _), _ in entries], dtype=np.int64)
            idx = np.array([i for (_, i), _ in entries], dtype=np.int64).reshape(len(entries), k)
            coeffs = np.array([c for _, c in entries], dtype=float)
            out.append((k, rows, idx, coeffs))
        return out

    def __call__(self, u: Sequence[float] | np.ndarray) -> np.ndarray:
        return eval_field(self, u)

    def __repr__(self) -> str:
        nnz = {k: len(t) for k, t in self._tables.items()}
        return f"PolyField(D={self.dimension}, nnz_by_degree={nnz})"


def flow_from_potential(U: Polynomial) -> PolyField:
    """Gradient-flow field ``du/dt = -grad U``; the field remembers ``U``."""
    return PolyField.from_components([-g for g in gradient(U)], potential=U)


def eval_field(f: PolyField, u: Sequence[float] | np.ndarray) -> np.ndarray:
    """Evaluate ``f`` at ``u`` by monomial substitution (no tensor powers formed)."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != f.dimension:
        raise ValueError(f"expected state of length {f.dimension}, got {u.shape[0]}")
    out = np.zeros(f.dimension)
    for k, rows, idx, coeffs in f._compiled:
        vals = coeffs * np.prod(u[idx], axis=1) if k else coeffs
        out += np.bincount(rows, weights=vals, minlength=f.dimension)
    return out
