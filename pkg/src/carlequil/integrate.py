"""Adaptive Dormand-Prince 5(4) integration of gradient flows and lifted systems."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .carleman import LiftedSystem, lift_state, lifted_matvec
from .polysys import PolyField, eval_field

__all__ = [
    "IntegratorConfig",
    "Status",
    "Trajectory",
    "IntegrationError",
    "dopri5",
    "integrate_nonlinear",
    "integrate_lifted",
]

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """Step budget exhausted or step size underflow."""


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    REACHED_T_END = "ReachedTEnd"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``samples`` is the number of equally spaced output times including 0 and
    ``t_end``; ``None`` records every accepted step.  ``energy_guard`` flags a
    lifted run as diverged once the physical estimate ``y_1`` has potential
    energy above the starting value, which a gradient flow can never reach.
    """

    t_end: float = 1.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 200_000
    divergence_threshold: float = 1e6
    samples: int | None = None
    converge_tol: float = 1e-10
    energy_guard: bool = True
    energy_tol: float = 1e-8

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.samples is not None and self.samples < 2:
            raise ValueError("samples must be >= 2")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    status: Status
    t_status: float | None = None
    steps: int = 0
    rejected: int = 0
    lifted_final: np.ndarray | None = field(default=None, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def diverged(self) -> bool:
        return self.status is Status.DIVERGED


# Dormand & Prince (1980) tableau
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _initial_step(fun, y0, f0, rtol, atol, t_span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t_span)
    y1 = y0 + h0 * f0
    d2 = np.max(np.abs(fun(y1) - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, t_span)


def dopri5(
    fun: Callable[[np.ndarray], np.ndarray],
    y0: np.ndarray,
    cfg: IntegratorConfig,
    check: Callable[[float, np.ndarray], Status | None] | None = None,
) -> Trajectory:
    """Integrate the autonomous system ``y' = fun(y)`` from 0 to ``cfg.t_end``.

    ``check(t, y)`` runs after every accepted step (and at t=0); returning a
    :class:`Status` stops integration with that status.  Norm-based divergence
    and non-finite states are detected here.
    """
    t_end = cfg.t_end
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    y = np.array(y0, dtype=float)
    t = 0.0
    grid = None if cfg.samples is None else np.linspace(0.0, t_end, cfg.samples)
    next_out = 1
    times, states = [0.0], [y.copy()]

    def _diverged(v):
        return not np.all(np.isfinite(v)) or np.max(np.abs(v)) > cfg.divergence_threshold

    if _diverged(y):
        return Trajectory(np.array(times), np.array(states), Status.DIVERGED, 0.0)
    if check is not None:
        st = check(t, y)
        if st is not None:
            return _finish(times, states, st, 0.0, t_end, y, 0, 0)

    k1 = fun(y)
    h = _initial_step(fun, y, k1, rtol, atol, t_end)
    steps = rejected = 0
    K = np.empty((7, y.size))
    while t < t_end:
        if steps + rejected >= cfg.max_steps:
            raise IntegrationError(f"max_steps={cfg.max_steps} exceeded at t={t:.6g}")
        target = t_end if grid is None else grid[next_out]
        h = min(h, target - t)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")

        K[0] = k1
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(1, 7):
                K[i] = fun(y + h * (np.asarray(_A[i]) @ K[:i]))
            y_new = y + h * (_B5 @ K)
            err = h * (_E @ K)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = np.max(np.abs(err) / scale)

        if not np.isfinite(err_norm) or not np.all(np.isfinite(y_new)):
            if h < 1e-10 * t_end or _diverged(y_new):
                times.append(t + h)
                states.append(y_new)
                return Trajectory(np.array(times), np.array(states), Status.DIVERGED, t + h,
                                  steps, rejected)
            h *= 0.2
            rejected += 1
            continue

        if err_norm <= 1.0:
            t_new = t + h
            if grid is not None and abs(t_new - grid[next_out]) <= 1e-12 * t_end:
                t_new = grid[next_out]
            elif grid is None and abs(t_end - t_new) <= 1e-12 * t_end:
                t_new = t_end
            t, y, k1 = t_new, y_new, K[6].copy()
            steps += 1
            at_grid = grid is None or t == grid[next_out]
            if at_grid:
                times.append(t)
                states.append(y.copy())
                if grid is not None:
                    next_out = min(next_out + 1, len(grid) - 1)
            if _diverged(y):
                if not at_grid:
                    times.append(t)
                    states.append(y.copy())
                return Trajectory(np.array(times), np.array(states), Status.DIVERGED, t,
                                  steps, rejected)
            if check is not None:
                st = check(t, y)
                if st is not None:
                    if not at_grid:
                        times.append(t)
                        states.append(y.copy())
                    return _finish(times, states, st, t, t_end, y, steps, rejected)
            fac = 5.0 if err_norm == 0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
        else:
            rejected += 1
            fac = max(0.2, 0.9 * err_norm ** -0.2)
        h *= fac

    return Trajectory(np.array(times), np.array(states), Status.REACHED_T_END, None, steps, rejected)


def _finish(times, states, status, t_status, t_end, y, steps, rejected):
    # an equilibrium (or any early stop other than divergence) is held to t_end
    if status is not Status.DIVERGED and times[-1] < t_end:
        times.append(t_end)
        states.append(y.copy())
    return Trajectory(np.array(times), np.array(states), status, t_status, steps, rejected)


def integrate_nonlinear(f: PolyField, u0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate ``du/dt = f(u)``; stops early once ``||f(u)||_inf < cfg.converge_tol``."""
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    if u0.size != f.dimension:
        raise ValueError(f"initial state has length {u0.size}, field dimension is {f.dimension}")

    def check(t, u):
        if np.max(np.abs(eval_field(f, u))) < cfg.converge_tol:
            return Status.CONVERGED
        return None

    return dopri5(lambda u: eval_field(f, u), u0, cfg, check)


def integrate_lifted(
    sys: LiftedSystem, u0, cfg: IntegratorConfig = IntegratorConfig()
) -> Trajectory:
    """Integrate ``dy/dt = A y`` from ``lift_state(u0, P)``; samples report block 1."""
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    if u0.size != sys.n:
        raise ValueError(f"initial state has length {u0.size}, lifted base dimension is {sys.n}")
    y0 = lift_state(u0, sys.order)
    lo, hi = sys.offsets[1], sys.offsets[2]
    check = None
    U = sys.field.potential
    if cfg.energy_guard and U is not None:
        u_ref = U(u0)
        bound = u_ref + cfg.energy_tol * max(1.0, abs(u_ref))

        def check(t, y):
            if U(y[lo:hi]) > bound:
                log.debug("energy guard tripped at t=%.6g", t)
                return Status.DIVERGED
            return None

    traj = dopri5(lambda y: lifted_matvec(sys, y), y0, cfg, check)
    traj.lifted_final = traj.states[-1].copy()
    traj.states = traj.states[:, lo:hi].copy()
    return traj
