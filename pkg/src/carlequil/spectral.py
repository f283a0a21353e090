"""Eigenvalue and norm analysis of lifted operators, plus query/qubit estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .carleman import DEFAULT_DENSE_CAP, LiftedSystem, assemble_dense, lifted_dimension
from .models import ChainModel, SpringParams, chain_field, spring_field

__all__ = [
    "SpectralReport",
    "ResourceEstimate",
    "NoSignChangeError",
    "max_real_eig",
    "stability_threshold",
    "threshold_sweep",
    "spectral_norm",
    "alpha_bound",
    "qubit_count",
    "estimate_resources",
]


class NoSignChangeError(ValueError):
    """The stability indicator has the same sign at both ends of the bracket."""


@dataclass(frozen=True)
class SpectralReport:
    norm: float
    iterations: int
    residual: float
    converged: bool


def max_real_eig(
    sys: LiftedSystem, cap: int = DEFAULT_DENSE_CAP, include_constant: bool = False
) -> float:
    """Largest real part of the eigenvalues of the lifted operator.

    Row 0 of the operator is zero, so ``0`` is always an eigenvalue; it is
    excluded unless ``include_constant`` is set, leaving the spectrum of the
    dynamic blocks ``y_1..y_P``.
    """
    A = assemble_dense(sys, cap)
    if not include_constant:
        A = A[1:, 1:]
    ev = np.linalg.eigvals(A)
    return float(ev.real.max())


def _spring_indicator(k: float, a: float, order: int, b: float) -> float:
    return max_real_eig(LiftedSystem(spring_field(SpringParams(k, a, b)), order))


def stability_threshold(
    k: float, a: float, order: int, b_lo: float, b_hi: float, tol: float = 1e-3
) -> float:
    """Force ``b`` where the Carleman spring operator first has an eigenvalue with positive real part."""
    f_lo = _spring_indicator(k, a, order, b_lo)
    f_hi = _spring_indicator(k, a, order, b_hi)
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError(
            f"max real eigenvalue has the same sign at b={b_lo} ({f_lo:.3e}) and b={b_hi} ({f_hi:.3e})"
        )
    lo, hi = (b_lo, b_hi) if f_lo <= 0 else (b_hi, b_lo)
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if _spring_indicator(k, a, order, mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def threshold_sweep(
    k: float, a: float, orders: Sequence[int], b_lo: float = 0.1, b_hi: float = 2.0, tol: float = 1e-3
) -> dict[int, float | None]:
    """Threshold per truncation order (``None`` where the bracket has no crossing)."""
    out: dict[int, float | None] = {}
    for P in orders:
        try:
            out[P] = stability_threshold(k, a, P, b_lo, b_hi, tol)
        except NoSignChangeError:
            out[P] = None
    return out


def spectral_norm(
    sys: LiftedSystem, iters: int = 5000, tol: float = 1e-12, seed: int = 0
) -> SpectralReport:
    """Power iteration on ``A^T A`` using only the lifted matvec and its transpose.

    The returned value is ``sqrt`` of a Rayleigh quotient, hence never above
    the true norm.  ``residual`` is ``||A^T A v - lam v|| / lam`` at the last
    iterate.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(sys.dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    residual = math.inf
    restarts = 0
    for it in range(1, iters + 1):
        w = sys.rmatvec(sys.matvec(v))
        lam_new = float(v @ w)
        wn = np.linalg.norm(w)
        if wn == 0.0:
            if restarts < 2:
                restarts += 1
                v = rng.standard_normal(sys.dim)
                v /= np.linalg.norm(v)
                continue
            return SpectralReport(0.0, it, 0.0, True)
        residual = float(np.linalg.norm(w - lam_new * v) / max(lam_new, 1e-300))
        v = w / wn
        if abs(lam_new - lam) <= tol * lam_new and residual < 1e-5:
            lam = lam_new
            return SpectralReport(math.sqrt(max(lam, 0.0)), it, residual, True)
        lam = lam_new
    return SpectralReport(math.sqrt(max(lam, 0.0)), iters, residual, False)


def alpha_bound(order: int, k: float, a: float, b: Sequence[float] | np.ndarray) -> float:
    """``P^(3/2) sqrt(||b||^2 + 16 k^2 + 40 a^2)``, an upper bound on ``||A||_2`` for the chain."""
    bb = float(np.dot(b, b))
    return order**1.5 * math.sqrt(bb + 16 * k * k + 40 * a * a)


def qubit_count(n: int, order: int) -> int:
    return max(1, math.ceil(math.log2(lifted_dimension(n, order))))


@dataclass(frozen=True)
class ResourceEstimate:
    n: int
    order: int
    dimension: int
    qubits: int
    alpha_bound: float
    alpha_numeric: float | None
    t: float
    epsilon: float

    @property
    def alpha_t(self) -> float:
        """Leading query term, ``alpha * t`` with the analytic alpha."""
        return self.alpha_bound * self.t

    @property
    def log_term(self) -> float:
        """Additive ``ln(1/epsilon)`` term; no constant is attached."""
        return math.log(1.0 / self.epsilon)

    @property
    def query_order(self) -> str:
        return f"O({self.alpha_t:.6g} + ln(1/eps)={self.log_term:.6g})"


def estimate_resources(
    n: int,
    order: int,
    k: float,
    a: float,
    b: Sequence[float],
    t: float = 1.0,
    epsilon: float = 1e-3,
    numeric_cap: int = 5000,
    iters: int = 5000,
) -> ResourceEstimate:
    """Resource figures for the Carleman-lifted periodic chain.

    ``alpha_numeric`` is the power-iteration norm of the lifted operator built
    from the minimum-norm (symmetrized) coefficient tensors; it is skipped when
    the lifted dimension exceeds ``numeric_cap``.
    """
    b = np.asarray(b, dtype=float)
    if b.size != n:
        raise ValueError(f"force vector has length {b.size}, expected {n}")
    if not (t > 0 and 0 < epsilon < 1):
        raise ValueError("need t > 0 and 0 < epsilon < 1")
    dim = lifted_dimension(n, order)
    numeric = None
    if dim <= numeric_cap:
        sys = LiftedSystem(chain_field(ChainModel(n, k, a, tuple(b))), order, form="symmetric")
        numeric = spectral_norm(sys, iters=iters).norm
    return ResourceEstimate(n, order, dim, qubit_count(n, order), alpha_bound(order, k, a, b),
                            numeric, t, epsilon)
