"""Spring, periodic chain and planar truss models as polynomial potentials.

All springs share the force law ``f(d) = k d + a d**3``.  External loads enter
the potential as ``-b . u`` so that the gradient flow pushes along the load.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .polysys import PolyField, Polynomial, flow_from_potential, hessian

__all__ = [
    "SpringParams",
    "ChainModel",
    "TrussModel",
    "spring_potential",
    "spring_field",
    "chain_potential",
    "chain_field",
    "chain_rhs_elementwise",
    "chain_operators",
    "truss_edge_energy",
    "exact_edge_energy",
    "truss_potential",
    "truss_field",
    "two_bay_truss",
    "chain_load",
]


@dataclass(frozen=True)
class SpringParams:
    k: float = 10.0
    a: float = 3000.0
    b: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("spring stiffness k must be positive")
        if self.a < 0:
            raise ValueError("cubic coefficient a must be non-negative")


def spring_potential(p: SpringParams) -> Polynomial:
    """``U(u) = k u^2/2 + a u^4/4 - b u``."""
    u = Polynomial.variable(1, 0)
    return 0.5 * p.k * u**2 + 0.25 * p.a * u**4 - p.b * u


def spring_field(p: SpringParams) -> PolyField:
    return flow_from_potential(spring_potential(p))


# ---------------------------------------------------------------------------
# periodic chain


def chain_load(n: int, F: float) -> np.ndarray:
    """``+F`` on the first half of the masses, ``-F`` on the second half."""
    if n % 2:
        raise ValueError("the split load needs an even number of masses")
    return np.concatenate([np.full(n // 2, F), np.full(n // 2, -F)])


@dataclass(frozen=True)
class ChainModel:
    """``N`` masses on a ring; spring ``i`` joins masses ``i`` and ``i+1 mod N``."""

    n: int
    k: float = 10.0
    a: float = 3000.0
    b: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a chain needs at least two masses")
        if self.k < 0 or self.a < 0:
            raise ValueError("spring coefficients must be non-negative")
        b = tuple(float(x) for x in self.b) if len(self.b) else (0.0,) * self.n
        if len(b) != self.n:
            raise ValueError(f"force vector has length {len(b)}, expected {self.n}")
        object.__setattr__(self, "b", b)

    @classmethod
    def split_load(cls, n: int, F: float, k: float = 10.0, a: float = 3000.0) -> "ChainModel":
        return cls(n, k, a, tuple(chain_load(n, F)))


def chain_potential(m: ChainModel) -> Polynomial:
    N = m.n
    u = [Polynomial.variable(N, i) for i in range(N)]
    U = Polynomial(N)
    for i in range(N):
        d = u[i] - u[(i + 1) % N]
        U = U + 0.5 * m.k * d**2 + 0.25 * m.a * d**4 - m.b[i] * u[i]
    return U


def chain_field(m: ChainModel) -> PolyField:
    return flow_from_potential(chain_potential(m))


def chain_rhs_elementwise(m: ChainModel, u: Sequence[float]) -> np.ndarray:
    """Right-hand side written per mass, with periodic neighbours."""
    u = np.asarray(u, dtype=float)
    left = u - np.roll(u, 1)  # u_i - u_{i-1}
    right = u - np.roll(u, -1)  # u_i - u_{i+1}
    return -m.k * (left + right) - m.a * (left**3 + right**3) + np.asarray(m.b)


def chain_operators(m: ChainModel) -> tuple[np.ndarray, np.ndarray, sp.csr_matrix]:
    """``(F0, F1, F3)`` in shift-matrix form.

    ``F1 = k (S + S^T - 2I)`` and ``F3 = a V ((S^T - I)^(x)3 - (I - S)^(x)3)``
    with ``(S u)_i = u_{i+1}`` and ``V`` picking the diagonal ``(i, i, i)`` entry
    of each row.  ``F3`` is returned as a sparse ``N x N^3`` matrix.
    """
    N = m.n
    S = np.roll(np.eye(N), 1, axis=1)
    I = np.eye(N)
    F0 = np.asarray(m.b, dtype=float).reshape(N, 1)
    F1 = m.k * (S + S.T - 2 * I)
    L = sp.csr_matrix(S.T - I)
    R = sp.csr_matrix(I - S)
    T = sp.kron(sp.kron(L, L), L) - sp.kron(sp.kron(R, R), R)
    diag = [i * N * N + i * N + i for i in range(N)]
    V = sp.csr_matrix((np.ones(N), (np.arange(N), diag)), shape=(N, N**3))
    F3 = (m.a * (V @ T)).tocsr()
    F3.eliminate_zeros()
    return F0, F1, F3


# ---------------------------------------------------------------------------
# planar truss


def truss_edge_energy(
    x: float,
    y: float,
    k: float,
    a: float,
    u: Polynomial | None = None,
    v: Polynomial | None = None,
) -> Polynomial:
    """Quartic model of the energy of one member.

    ``(x, y)`` is the natural separation of the endpoints and ``(u, v)`` their
    relative displacement, given as polynomials in the global unknowns (by
    default the two variables of a ``D=2`` polynomial).  With
    ``l1 = u x + v y`` and ``l2 = u^2 + v^2``::

        k/2 (l1^2/L^2 + l1 l2/L^2 - l1^3/L^4 + l2^2/(4L^2)
             - 3 l1^2 l2/(2L^4) + 5 l1^4/(4L^6)) + a l1^4/(4L^4)

    which matches ``k/2 dL^2 + a/4 dL^4`` up to fifth order in the displacement.
    """
    L2 = x * x + y * y
    if L2 == 0.0:
        raise ValueError("member has zero natural length")
    if u is None or v is None:
        u = Polynomial.variable(2, 0)
        v = Polynomial.variable(2, 1)
    l1 = x * u + y * v
    l2 = u**2 + v**2
    l1_2 = l1**2
    elastic = (
        l1_2 / L2
        + l1 * l2 / L2
        - l1 * l1_2 / L2**2
        + l2**2 / (4 * L2)
        - 1.5 * l1_2 * l2 / L2**2
        + 1.25 * l1_2**2 / L2**3
    )
    return 0.5 * k * elastic + (0.25 * a / L2**2) * l1_2**2


def exact_edge_energy(x: float, y: float, k: float, a: float, u: float, v: float) -> float:
    """``k/2 dL^2 + a/4 dL^4`` with the exact (square-root) extension."""
    L0 = math.hypot(x, y)
    L = math.hypot(x + u, y + v)
    # (L^2 - L0^2)/(L + L0) avoids cancellation for small displacements
    dL = (2 * (u * x + v * y) + u * u + v * v) / (L + L0)
    return 0.5 * k * dL**2 + 0.25 * a * dL**4


@dataclass
class TrussModel:
    """Pin-jointed planar truss.

    ``forces`` maps node index to ``(fx, fy)``.  Degrees of freedom are the
    ``(u, v)`` displacements of the free nodes, in node order.
    """

    nodes: list[tuple[float, float]]
    edges: list[tuple[int, int]]
    fixed: set[int] = field(default_factory=set)
    forces: dict[int, tuple[float, float]] = field(default_factory=dict)
    k: float = 10.0
    a: float = 3000.0

    def __post_init__(self):
        self.nodes = [(float(px), float(py)) for px, py in self.nodes]
        self.fixed = set(int(i) for i in self.fixed)
        seen = set()
        edges = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < len(self.nodes) and 0 <= j < len(self.nodes)):
                raise ValueError(f"invalid member ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            (xi, yi), (xj, yj) = self.nodes[i], self.nodes[j]
            if xi == xj and yi == yj:
                raise ValueError(f"member ({i}, {j}) has zero natural length")
            edges.append(key)
        self.edges = edges
        if not self.fixed <= set(range(len(self.nodes))):
            raise ValueError("fixed node index out of range")
        if self.k < 0 or self.a < 0:
            raise ValueError("spring coefficients must be non-negative")

    @property
    def free_nodes(self) -> list[int]:
        return [i for i in range(len(self.nodes)) if i not in self.fixed]

    @property
    def n_dof(self) -> int:
        return 2 * len(self.free_nodes)

    def dof_index(self) -> dict[int, int]:
        """Map free node -> index of its ``u`` unknown (``v`` follows)."""
        return {node: 2 * j for j, node in enumerate(self.free_nodes)}

    def node_displacements(self, q: Sequence[float]) -> np.ndarray:
        """Expand a DOF vector to an ``(n_nodes, 2)`` array with zeros at fixed nodes."""
        q = np.asarray(q, dtype=float)
        out = np.zeros((len(self.nodes), 2))
        for node, j in self.dof_index().items():
            out[node] = q[j : j + 2]
        return out

    def with_params(self, **kw) -> "TrussModel":
        data = dict(nodes=self.nodes, edges=self.edges, fixed=self.fixed, forces=self.forces,
                    k=self.k, a=self.a)
        data.update(kw)
        return TrussModel(**data)


def truss_potential(m: TrussModel) -> Polynomial:
    """Sum of member energies minus the work of the nodal loads."""
    D = m.n_dof
    if D == 0:
        raise ValueError("truss has no free degrees of freedom")
    idx = m.dof_index()
    zero = Polynomial(D)

    def disp(node):
        if node in idx:
            return Polynomial.variable(D, idx[node]), Polynomial.variable(D, idx[node] + 1)
        return zero, zero

    U = Polynomial(D)
    for i, j in m.edges:
        if i in m.fixed and j in m.fixed:
            continue
        (xi, yi), (xj, yj) = m.nodes[i], m.nodes[j]
        ui, vi = disp(i)
        uj, vj = disp(j)
        U = U + truss_edge_energy(xi - xj, yi - yj, m.k, m.a, ui - uj, vi - vj)
    for node, (fx, fy) in m.forces.items():
        if node in m.fixed:
            if fx or fy:
                warnings.warn(f"force on fixed node {node} is ignored", stacklevel=2)
            continue
        if node not in idx:
            raise ValueError(f"force on unknown node {node}")
        U = U - fx * Polynomial.variable(D, idx[node]) - fy * Polynomial.variable(D, idx[node] + 1)

    H = np.array([[h(np.zeros(D)) for h in row] for row in hessian(U)])
    if np.linalg.eigvalsh(H).min() <= 1e-12 * max(1.0, np.abs(H).max()):
        raise ValueError("truss has a zero-stiffness mechanism at the natural state")
    return U


def truss_field(m: TrussModel) -> PolyField:
    return flow_from_potential(truss_potential(m))


# nodes (0,0) (0,1) (1,0) (1,1) (2,0) (2,1)
_TWO_BAY_NODES = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)]
_TWO_BAY_EDGES = [(0, 2), (2, 4), (1, 3), (3, 5), (0, 1), (2, 3), (4, 5), (0, 3), (2, 5)]


def two_bay_truss(F: float, k: float = 10.0, a: float = 3000.0) -> TrussModel:
    """Two-bay truss, left nodes pinned, load ``(F, 0)`` at node (2, 0).

    Members: all unit horizontals and verticals plus one diagonal per bay.
    """
    return TrussModel(list(_TWO_BAY_NODES), list(_TWO_BAY_EDGES), {0, 1}, {4: (F, 0.0)}, k, a)
