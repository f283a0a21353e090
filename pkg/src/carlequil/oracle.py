"""Reference equilibrium solvers used to score the lifted methods."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, integrate_nonlinear
from .polysys import Polynomial, flow_from_potential, gradient, hessian

__all__ = ["OracleResult", "OracleError", "solve_equilibrium", "cubic_root"]

log = logging.getLogger(__name__)


class OracleError(RuntimeError):
    """Neither Newton nor the flow-assisted retry reached the residual target."""


@dataclass(frozen=True)
class OracleResult:
    u_star: np.ndarray
    residual: float
    iterations: int
    method: str


def cubic_root(k: float, a: float, b: float) -> float:
    """Non-negative root of ``k u + a u^3 = b`` (``k > 0, a >= 0, b >= 0``).

    The cubic is increasing, so the root lies in ``[0, b/k]``; Newton steps
    that leave the current bracket are replaced by bisection.
    """
    if not k > 0 or a < 0 or b < 0:
        raise ValueError("cubic_root needs k > 0, a >= 0, b >= 0")
    if b == 0:
        return 0.0
    if a == 0:
        return b / k
    lo, hi = 0.0, b / k
    u = min(hi, (b / a) ** (1 / 3))
    for _ in range(200):
        g = k * u + a * u**3 - b
        if g > 0:
            hi = u
        else:
            lo = u
        step = g / (k + 3 * a * u * u)
        nu = u - step
        if not lo < nu < hi:
            nu = 0.5 * (lo + hi)
        if abs(nu - u) <= 1e-14 * max(abs(nu), 1e-300) or hi - lo <= 1e-16 * hi:
            return nu
        u = nu
    return u


class _Compiled:
    def __init__(self, U: Polynomial):
        self.U = U
        self.grad = gradient(U)
        self.hess = hessian(U)

    def g(self, u):
        return np.array([p(u) for p in self.grad])

    def H(self, u):
        return np.array([[p(u) for p in row] for row in self.hess])


def _newton(c: _Compiled, u0: np.ndarray, tol: float, max_iter: int):
    u = u0.copy()
    g = c.g(u)
    E = c.U(u)
    for it in range(1, max_iter + 1):
        if not (np.all(np.isfinite(g)) and np.isfinite(E)):
            return u, it - 1, False
        if np.max(np.abs(g)) <= tol:
            return u, it - 1, True
        # lstsq tolerates the singular Hessian of translation-invariant models
        d = np.linalg.lstsq(c.H(u), -g, rcond=None)[0]
        if not np.all(np.isfinite(d)) or g @ d >= 0:
            d = -g
        t = 1.0
        gn = np.max(np.abs(g))
        while t > 1e-12:
            un = u + t * d
            En = c.U(un)
            g_new = c.g(un)
            if En < E or np.max(np.abs(g_new)) < gn:
                break
            t *= 0.5
        else:
            return u, it, False
        u, g, E = un, g_new, En
    return u, max_iter, np.max(np.abs(g)) <= tol


def solve_equilibrium(
    U: Polynomial,
    u0=None,
    tol: float = 1e-10,
    max_iter: int = 100,
    flow_time: float = 10.0,
) -> OracleResult:
    """Stationary point of ``U`` reached from ``u0`` (default: the origin).

    Damped Newton with an exact polynomial Hessian; if it stalls, the gradient
    flow is run to ``flow_time`` first and Newton is restarted from there.
    """
    u0 = np.zeros(U.dimension) if u0 is None else np.asarray(u0, dtype=float).reshape(-1)
    if u0.size != U.dimension:
        raise ValueError("initial guess has the wrong length")
    c = _Compiled(U)
    with np.errstate(over="ignore", invalid="ignore"):
        u, its, ok = _newton(c, u0, tol, max_iter)
        method = "newton"
        if not ok:
            log.info("Newton stalled after %d iterations; running gradient flow", its)
            traj = integrate_nonlinear(flow_from_potential(U), u0, IntegratorConfig(t_end=flow_time))
            if traj.diverged:
                raise OracleError(f"gradient flow diverged at t={traj.t_status:.4g}; "
                                  "the potential may be unbounded below")
            u, its2, ok = _newton(c, traj.final, tol, max_iter)
            its += its2
            method = "flow+newton"
        res = float(np.max(np.abs(c.g(u))))
    if not ok or res > tol:
        raise OracleError(f"equilibrium solve failed (residual {res:.3e})")
    return OracleResult(u, res, its, method)
