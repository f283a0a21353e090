"""Command-line entry point: ``carlequil {spring|chain|truss|estimate} CONFIG``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import CHAIN_TRAJECTORY_COLUMNS, columns_for, run_chain, run_estimate, run_spring, \
    run_truss
from .integrate import IntegrationError
from .oracle import OracleError
from .output import format_value, read_csv, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("carlequil")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="carlequil",
        description="Equilibrium of nonlinear spring systems via Carleman-lifted gradient flow.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("experiment", choices=["spring", "chain", "truss", "estimate"])
    p.add_argument("config", type=Path, help="TOML experiment file")
    p.add_argument("--out", type=Path, metavar="DIR", help="output directory (overrides [output])")
    p.add_argument("--svg", action="store_true", help="also render SVG figures")
    p.add_argument("--p", type=int, metavar="ORDER", dest="order", help="truncation order")
    p.add_argument("--pivot", type=float, metavar="S", help="PSC pivot")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.out is not None:
        cfg.output = replace(cfg.output, directory=args.out)
    if args.svg:
        cfg.output = replace(cfg.output, svg=True)
    if args.order is not None:
        if args.order < 2:
            raise ConfigError("--p: must be >= max field degree - 1 = 2")
        cfg.method = replace(cfg.method, order=args.order)
        if cfg.kind == "estimate":
            cfg.model["order"] = [args.order]
    if args.pivot is not None:
        cfg.method = replace(cfg.method, pivot=args.pivot)
    return cfg


def run(cfg: ExperimentConfig) -> list[Path]:
    """Run the experiment described by ``cfg`` and write its outputs."""
    out = cfg.output.directory
    kind = cfg.kind
    written: list[Path] = []
    trajectories = {}
    if kind == "spring":
        rows = run_spring(cfg)
    elif kind == "chain":
        rows, trajectories = run_chain(cfg)
    elif kind == "truss":
        rows = run_truss(cfg)
    else:
        rows = run_estimate(cfg)

    csv_path = out / f"{kind}.csv"
    if cfg.output.csv or cfg.output.svg:
        written.append(write_csv(csv_path, columns_for(cfg), rows))
    for value, trows in trajectories.items():
        name = f"{kind}_trajectory_{cfg.sweep.parameter}{format_value(float(value))}.csv"
        written.append(write_csv(out / name, CHAIN_TRAJECTORY_COLUMNS, trows))
    if cfg.output.svg:
        from . import plotting

        data = read_csv(csv_path)
        svg = out / f"{kind}.svg"
        if kind == "spring":
            plotting.plot_spring(data, svg)
        elif kind == "chain":
            plotting.plot_chain(data, svg)
        elif kind == "truss":
            m = cfg.truss()
            plotting.plot_truss(data, svg, m.nodes, m.edges)
        else:
            plotting.plot_estimate(data, svg)
        written.append(svg)
        if not cfg.output.csv:
            csv_path.unlink()
            written.remove(csv_path)
    return written


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        if cfg.kind != args.experiment:
            raise ConfigError(f"{args.config}: file describes a {cfg.kind!r} experiment, "
                              f"not {args.experiment!r}")
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = run(cfg)
    except (OracleError, IntegrationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # model construction rejects some configs only once parameters are combined
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
