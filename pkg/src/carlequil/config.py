"""TOML experiment configuration: parsing, defaults and validation.

A config has exactly one model table (``[spring]``, ``[chain]``, ``[truss]`` or
``[estimate]``) plus optional ``[method]``, ``[integrator]``, ``[sweep]`` and
``[output]`` tables::

    [spring]
    k = 10.0
    a = 3000.0

    [method]
    closure = "psc"
    order = 5
    pivot = 0.01

    [sweep]
    parameter = "b"
    start = 0.0
    stop = 2.0
    step = 0.1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .integrate import IntegratorConfig
from .models import TrussModel, two_bay_truss
from .psc import DEFAULT_PIVOT

__all__ = ["ConfigError", "ExperimentConfig", "MethodConfig", "SweepConfig", "OutputConfig",
           "load_config", "parse_config"]

MODEL_KINDS = ("spring", "chain", "truss", "estimate")

_SWEEP_PARAMS = {
    "spring": ("b", "k", "a"),
    "chain": ("F", "k", "a"),
    "truss": ("F", "k", "a"),
    "estimate": (),
}

_DEFAULT_SWEEPS = {
    "spring": ("b", 0.0, 2.0, 0.1),
    "chain": ("F", 0.0, 0.30, 0.05),
}

# the truss relaxes slowly (softest stiffness mode ~0.36), so it needs a longer horizon
_DEFAULT_T_END = {"spring": 1.0, "chain": 1.0, "truss": 30.0, "estimate": 1.0}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class MethodConfig:
    closure: str = "carleman"
    order: int = 5
    pivot: float = DEFAULT_PIVOT


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    values: tuple[float, ...]
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("out")
    csv: bool = True
    svg: bool = False
    trajectory: bool = False


@dataclass
class ExperimentConfig:
    kind: str
    model: dict[str, Any]
    method: MethodConfig = field(default_factory=MethodConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    sweep: SweepConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def truss(self, F: float | None = None, **overrides) -> TrussModel:
        """Truss model from the config (two-bay geometry unless nodes/edges are given)."""
        m = self.model
        F = m.get("F", 0.0) if F is None else F
        k = overrides.get("k", m.get("k", 10.0))
        a = overrides.get("a", m.get("a", 3000.0))
        if "nodes" not in m:
            return two_bay_truss(F, k, a)
        load_node = int(m.get("load_node", 0))
        direction = m.get("load_direction", [1.0, 0.0])
        forces = {load_node: (F * direction[0], F * direction[1])}
        return TrussModel([tuple(p) for p in m["nodes"]], [tuple(e) for e in m["edges"]],
                          set(m.get("fixed", [])), forces, k, a)


def _err(path: str, msg: str) -> ConfigError:
    return ConfigError(f"{path}: {msg}")


def _number(tbl: dict, key: str, path: str, default=None, positive=False, nonneg=False):
    if key not in tbl:
        if default is None:
            raise _err(f"{path}.{key}", "missing required value")
        return default
    v = tbl[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise _err(f"{path}.{key}", f"expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise _err(f"{path}.{key}", f"must be positive, got {v}")
    if nonneg and v < 0:
        raise _err(f"{path}.{key}", f"must be non-negative, got {v}")
    return float(v)


def _check_keys(tbl: dict, allowed: set[str], path: str):
    extra = set(tbl) - allowed
    if extra:
        raise _err(path, f"unknown key(s) {sorted(extra)}; allowed: {sorted(allowed)}")


def _model(kind: str, tbl: dict) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if kind == "spring":
        _check_keys(tbl, {"k", "a", "b"}, "spring")
        out["k"] = _number(tbl, "k", "spring", 10.0, positive=True)
        out["a"] = _number(tbl, "a", "spring", 3000.0, nonneg=True)
        out["b"] = _number(tbl, "b", "spring", 0.0, nonneg=True)
    elif kind == "chain":
        _check_keys(tbl, {"n", "k", "a", "F", "b"}, "chain")
        n = tbl.get("n", 8)
        if not isinstance(n, int) or n < 2:
            raise _err("chain.n", f"expected an integer >= 2, got {n!r}")
        out["n"] = n
        out["k"] = _number(tbl, "k", "chain", 10.0, nonneg=True)
        out["a"] = _number(tbl, "a", "chain", 3000.0, nonneg=True)
        if "b" in tbl:
            b = tbl["b"]
            if not isinstance(b, list) or len(b) != n:
                raise _err("chain.b", f"expected a list of {n} numbers")
            out["b"] = [float(x) for x in b]
        elif n % 2:
            raise _err("chain.n", "the split +F/-F load needs an even number of masses")
        out["F"] = _number(tbl, "F", "chain", 0.0)
    elif kind == "truss":
        _check_keys(tbl, {"k", "a", "F", "nodes", "edges", "fixed", "load_node", "load_direction"},
                    "truss")
        out["k"] = _number(tbl, "k", "truss", 10.0, nonneg=True)
        out["a"] = _number(tbl, "a", "truss", 3000.0, nonneg=True)
        out["F"] = _number(tbl, "F", "truss", 0.0)
        if ("nodes" in tbl) != ("edges" in tbl):
            raise _err("truss", "nodes and edges must be given together")
        if "nodes" in tbl:
            nodes = tbl["nodes"]
            if not nodes or any(not isinstance(p, list) or len(p) != 2 for p in nodes):
                raise _err("truss.nodes", "expected a list of [x, y] pairs")
            if any(not isinstance(e, list) or len(e) != 2 for e in tbl["edges"]):
                raise _err("truss.edges", "expected a list of [i, j] pairs")
            out["nodes"] = nodes
            out["edges"] = tbl["edges"]
            out["fixed"] = list(tbl.get("fixed", []))
            out["load_node"] = int(tbl.get("load_node", len(nodes) - 1))
            out["load_direction"] = list(tbl.get("load_direction", [1.0, 0.0]))
            if out["load_node"] in out["fixed"]:
                raise _err("truss.load_node", "load applied to a fixed node")
            try:
                TrussModel([tuple(p) for p in nodes], [tuple(e) for e in tbl["edges"]],
                           set(out["fixed"]), {}, out["k"], out["a"])
            except ValueError as exc:
                raise _err("truss", str(exc)) from None
    else:  # estimate
        _check_keys(tbl, {"n", "order", "k", "a", "F", "t", "epsilon", "numeric_cap"}, "estimate")
        ns = tbl.get("n", [2, 4, 8])
        ps = tbl.get("order", [2, 3, 4, 5])
        for name, vals in (("n", ns), ("order", ps)):
            if not isinstance(vals, list) or not vals or any(
                not isinstance(v, int) or v < 1 for v in vals
            ):
                raise _err(f"estimate.{name}", "expected a non-empty list of positive integers")
        if any(v % 2 for v in ns):
            raise _err("estimate.n", "the split +F/-F load needs even chain sizes")
        out.update(n=ns, order=ps)
        out["k"] = _number(tbl, "k", "estimate", 10.0, nonneg=True)
        out["a"] = _number(tbl, "a", "estimate", 3000.0, nonneg=True)
        out["F"] = _number(tbl, "F", "estimate", 0.3)
        out["t"] = _number(tbl, "t", "estimate", 1.0, positive=True)
        out["epsilon"] = _number(tbl, "epsilon", "estimate", 1e-3, positive=True)
        if not out["epsilon"] < 1:
            raise _err("estimate.epsilon", "must be below 1")
        out["numeric_cap"] = int(tbl.get("numeric_cap", 5000))
    return out


def _sweep(kind: str, tbl: dict | None) -> SweepConfig | None:
    if kind == "estimate":
        if tbl:
            raise _err("sweep", "the estimate experiment takes its grid from [estimate]")
        return None
    tbl = dict(tbl or {})
    _check_keys(tbl, {"parameter", "start", "stop", "step", "values", "workers"}, "sweep")
    workers = tbl.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise _err("sweep.workers", "expected a positive integer")
    if kind == "truss" and not {"parameter", "start", "values"} & set(tbl):
        return SweepConfig("F", (0.3, 0.9), workers)
    default = _DEFAULT_SWEEPS.get(kind)
    param = tbl.get("parameter", default[0] if default else "F")
    if param not in _SWEEP_PARAMS[kind]:
        raise _err("sweep.parameter", f"{param!r} is not a parameter of the {kind} model "
                                      f"(choose from {list(_SWEEP_PARAMS[kind])})")
    if "values" in tbl:
        vals = tbl["values"]
        if not isinstance(vals, list) or not vals:
            raise _err("sweep.values", "expected a non-empty list of numbers")
        values = tuple(float(v) for v in vals)
    else:
        d_start, d_stop, d_step = default[1:] if default and param == default[0] else (None,) * 3
        start = _number(tbl, "start", "sweep", d_start)
        stop = _number(tbl, "stop", "sweep", d_stop)
        step = _number(tbl, "step", "sweep", d_step, positive=True)
        if stop < start:
            raise _err("sweep.stop", "must not be below sweep.start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(float(round(start + i * step, 12)) for i in range(count))
    if kind == "spring" and param == "b" and min(values) < 0:
        raise _err("sweep.values", "spring force b must be non-negative")
    if param == "k" and min(values) <= 0:
        raise _err("sweep.values", "stiffness k must be positive")
    return SweepConfig(param, values, workers)


def parse_config(data: dict) -> ExperimentConfig:
    kinds = [k for k in MODEL_KINDS if k in data]
    if len(kinds) != 1:
        raise ConfigError(f"expected exactly one model table among {list(MODEL_KINDS)}, "
                          f"found {kinds or 'none'}")
    kind = kinds[0]
    _check_keys(data, {kind, "method", "integrator", "sweep", "output"}, "<root>")
    model = _model(kind, dict(data[kind]))

    mt = dict(data.get("method", {}))
    _check_keys(mt, {"closure", "order", "pivot"}, "method")
    closure = mt.get("closure", "carleman")
    if closure not in ("carleman", "psc"):
        raise _err("method.closure", f"expected 'carleman' or 'psc', got {closure!r}")
    order = mt.get("order", 5)
    if not isinstance(order, int) or order < 1:
        raise _err("method.order", f"expected a positive integer, got {order!r}")
    # the field has degree 3, so rows must be able to reach y_{p+2}
    if kind != "estimate" and order < 2:
        raise _err("method.order", "must be >= max field degree - 1 = 2")
    if closure == "psc" and kind in ("chain", "truss"):
        raise _err("method.closure", "the pivot closure is only available for the scalar spring")
    method = MethodConfig(closure, order, _number(mt, "pivot", "method", DEFAULT_PIVOT))

    it = dict(data.get("integrator", {}))
    names = {f.name for f in fields(IntegratorConfig)}
    _check_keys(it, names, "integrator")
    it.setdefault("t_end", _DEFAULT_T_END[kind])
    try:
        integ = IntegratorConfig(**it)
    except (TypeError, ValueError) as exc:
        raise _err("integrator", str(exc)) from None

    sweep = _sweep(kind, data.get("sweep"))

    ot = dict(data.get("output", {}))
    _check_keys(ot, {"directory", "csv", "svg", "trajectory"}, "output")
    directory = Path(ot.get("directory", "out"))
    output = OutputConfig(directory, bool(ot.get("csv", True)), bool(ot.get("svg", False)),
                          bool(ot.get("trajectory", False)))
    return ExperimentConfig(kind, model, method, integ, sweep, output)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    except tomllib.TOMLDecodeError as exc:
        # message carries "(at line L, column C)"
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)

