"""Sweep runners for the spring, chain, truss and resource experiments.

Each runner takes an :class:`~carlequil.config.ExperimentConfig` and returns
rows (dicts keyed by the CSV column names, in sweep order).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Sequence, TypeVar

import numpy as np

from .carleman import LiftedSystem
from .config import ExperimentConfig
from .integrate import Status, integrate_lifted
from .models import ChainModel, SpringParams, chain_field, chain_load, chain_potential, spring_field, \
    truss_field, truss_potential
from .oracle import cubic_root, solve_equilibrium
from .psc import psc_assemble
from .spectral import estimate_resources

__all__ = [
    "SPRING_COLUMNS",
    "CHAIN_COLUMNS",
    "CHAIN_TRAJECTORY_COLUMNS",
    "TRUSS_COLUMNS",
    "ESTIMATE_COLUMNS",
    "run_spring",
    "run_chain",
    "run_truss",
    "run_estimate",
    "columns_for",
]

log = logging.getLogger(__name__)

SPRING_COLUMNS = ["b", "u_carleman", "status_carleman", "u_psc", "status_psc", "u_exact", "u_linear"]
CHAIN_COLUMNS = ["F", "i", "u_method_i", "u_exact_i", "u_linear_i"]
CHAIN_TRAJECTORY_COLUMNS = ["t", "i", "u_i"]
TRUSS_COLUMNS = ["F", "node", "ux_method", "uy_method", "ux_exact", "uy_exact", "ux_linear",
                 "uy_linear"]
ESTIMATE_COLUMNS = ["N", "P", "dim", "qubits", "alpha_bound", "alpha_numeric", "query_order_at_t"]

T = TypeVar("T")
R = TypeVar("R")


def _map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    # executor.map preserves input order, so output is independent of scheduling
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _sweep_values(cfg: ExperimentConfig) -> tuple[str, tuple[float, ...], int]:
    s = cfg.sweep
    return s.parameter, s.values, s.workers


def run_spring(cfg: ExperimentConfig) -> list[dict]:
    param, values, workers = _sweep_values(cfg)
    P, pivot = cfg.method.order, cfg.method.pivot

    def point(value: float) -> dict:
        params = dict(cfg.model)
        params[param] = value
        sp = SpringParams(params["k"], params["a"], params["b"])
        f = spring_field(sp)
        car = integrate_lifted(LiftedSystem(f, P), [0.0], cfg.integrator)
        psc = integrate_lifted(psc_assemble(f, P, pivot), [0.0], cfg.integrator)
        return {
            **({} if param == "b" else {param: value}),
            "b": sp.b,
            "u_carleman": float(car.final[0]),
            "status_carleman": car.status.value,
            "u_psc": float(psc.final[0]),
            "status_psc": psc.status.value,
            "u_exact": cubic_root(sp.k, sp.a, sp.b),
            "u_linear": sp.b / sp.k,
        }

    return _map(point, values, workers)


def _chain_model(cfg: ExperimentConfig, param: str, value: float, a: float | None = None):
    # an explicit load vector is used as given, or scaled by F when F is swept
    m = dict(cfg.model)
    m[param] = value
    if "b" in m:
        b = np.asarray(m["b"]) * (value if param == "F" else 1.0)
    else:
        b = chain_load(m["n"], m["F"])
    return ChainModel(m["n"], m["k"], m["a"] if a is None else a, tuple(b))


def run_chain(cfg: ExperimentConfig) -> tuple[list[dict], dict[float, list[dict]]]:
    """Rows per (F, mass), plus sampled method trajectories keyed by sweep value.

    The trajectory dict is empty unless ``output.trajectory`` is set.
    """
    param, values, workers = _sweep_values(cfg)
    P = cfg.method.order
    integ = cfg.integrator
    if cfg.output.trajectory and integ.samples is None:
        integ = replace(integ, samples=21)

    def point(value: float):
        m = _chain_model(cfg, param, value)
        lin = _chain_model(cfg, param, value, a=0.0)
        n = m.n
        traj = integrate_lifted(LiftedSystem(chain_field(m), P), np.zeros(n), integ)
        exact = solve_equilibrium(chain_potential(m)).u_star
        linear = solve_equilibrium(chain_potential(lin)).u_star
        if traj.status is Status.DIVERGED:
            log.warning("chain %s=%g: lifted run diverged at t=%.4g", param, value, traj.t_status)
        rows = [
            {
                **({} if param == "F" else {param: value}),
                "F": cfg.model["F"] if param != "F" else value,
                "i": i,
                "u_method_i": None if traj.diverged else float(traj.final[i]),
                "u_exact_i": float(exact[i]),
                "u_linear_i": float(linear[i]),
            }
            for i in range(n)
        ]
        trows = []
        if cfg.output.trajectory:
            for t, u in zip(traj.times, traj.states):
                trows.extend({"t": float(t), "i": i, "u_i": float(u[i])} for i in range(n))
        return rows, trows

    results = _map(point, values, workers)
    trajectories = {v: tr for v, (_, tr) in zip(values, results) if tr}
    return [r for rows, _ in results for r in rows], trajectories


def run_truss(cfg: ExperimentConfig) -> list[dict]:
    param, values, workers = _sweep_values(cfg)
    P = cfg.method.order

    def point(value: float) -> list[dict]:
        F = value if param == "F" else cfg.model["F"]
        overrides = {param: value} if param != "F" else {}
        m = cfg.truss(F, **overrides)
        lin = m.with_params(a=0.0)
        exact = m.node_displacements(solve_equilibrium(truss_potential(m)).u_star)
        linear = lin.node_displacements(solve_equilibrium(truss_potential(lin)).u_star)
        traj = integrate_lifted(LiftedSystem(truss_field(m), P), np.zeros(m.n_dof), cfg.integrator)
        if traj.diverged:
            log.warning("truss %s=%g: lifted run diverged at t=%.4g", param, value, traj.t_status)
            method = np.full_like(exact, np.nan)
        else:
            method = m.node_displacements(traj.final)
        return [
            {
                **({} if param == "F" else {param: value}),
                "F": F,
                "node": node,
                "ux_method": _opt(method[node, 0]),
                "uy_method": _opt(method[node, 1]),
                "ux_exact": float(exact[node, 0]),
                "uy_exact": float(exact[node, 1]),
                "ux_linear": float(linear[node, 0]),
                "uy_linear": float(linear[node, 1]),
            }
            for node in range(len(m.nodes))
        ]

    return [r for rows in _map(point, values, workers) for r in rows]


def _opt(x: float) -> float | None:
    return None if not np.isfinite(x) else float(x)


def run_estimate(cfg: ExperimentConfig) -> list[dict]:
    m = cfg.model
    rows = []
    for n in m["n"]:
        for P in m["order"]:
            est = estimate_resources(n, P, m["k"], m["a"], chain_load(n, m["F"]), m["t"],
                                     m["epsilon"], numeric_cap=m["numeric_cap"])
            rows.append({
                "N": n,
                "P": P,
                "dim": est.dimension,
                "qubits": est.qubits,
                "alpha_bound": est.alpha_bound,
                "alpha_numeric": est.alpha_numeric,
                "query_order_at_t": est.alpha_t,
            })
    return rows


def columns_for(cfg: ExperimentConfig) -> list[str]:
    """CSV header; a sweep over anything but the load adds a leading column for it."""
    cols = {"spring": SPRING_COLUMNS, "chain": CHAIN_COLUMNS, "truss": TRUSS_COLUMNS,
            "estimate": ESTIMATE_COLUMNS}[cfg.kind]
    if cfg.sweep is not None and cfg.sweep.parameter not in cols:
        return [cfg.sweep.parameter, *cols]
    return list(cols)
