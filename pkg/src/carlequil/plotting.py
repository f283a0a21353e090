"""SVG figures rendered from CSV rows.

Every function takes rows as read back by :func:`carlequil.output.read_csv`
(string fields), so a figure depends only on the CSV file it visualises.
Output is byte-stable: the SVG date stamp is dropped and element ids are
seeded with a fixed salt.
"""

from __future__ import annotations

from collections import defaultdict
from contextlib import contextmanager
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["plot_spring", "plot_chain", "plot_truss", "plot_estimate"]

_STYLE = {
    "svg.hashsalt": "carlequil",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.3,
    "lines.markersize": 4,
    "legend.frameon": False,
}


@contextmanager
def _style():
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        try:
            yield fig, ax
        finally:
            plt.close(fig)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _f(s: str) -> float:
    return float(s) if s != "" else float("nan")


def plot_spring(rows: Sequence[dict], path: str | Path) -> Path:
    """Displacement against load for the Carleman, PSC, exact and linear columns."""
    b = [_f(r["b"]) for r in rows]
    with _style() as (fig, ax):
        ax.plot(b, [_f(r["u_exact"]) for r in rows], "k-", label="exact")
        ax.plot(b, [_f(r["u_linear"]) for r in rows], "k:", label="linear")
        for col, status, marker, label in (
            ("u_carleman", "status_carleman", "o", "Carleman"),
            ("u_psc", "status_psc", "s", "PSC"),
        ):
            ok = [(x, _f(r[col])) for x, r in zip(b, rows) if r[status] != "Diverged"]
            if ok:
                xs, ys = zip(*ok)
                ax.plot(xs, ys, marker, fillstyle="none", label=label)
        ax.set_xlabel("load b")
        ax.set_ylabel("displacement u")
        ax.legend()
        return _save(fig, path)


def plot_chain(rows: Sequence[dict], path: str | Path) -> Path:
    """Displacement profile along the chain at the largest load in the file."""
    F_max = max(_f(r["F"]) for r in rows)
    sel = [r for r in rows if _f(r["F"]) == F_max]
    i = [int(r["i"]) for r in sel]
    with _style() as (fig, ax):
        ax.plot(i, [_f(r["u_exact_i"]) for r in sel], "k-", label="exact")
        ax.plot(i, [_f(r["u_linear_i"]) for r in sel], "k:", label="linear")
        ax.plot(i, [_f(r["u_method_i"]) for r in sel], "o", fillstyle="none", label="Carleman")
        ax.set_xlabel("mass index i")
        ax.set_ylabel("displacement u_i")
        ax.set_title(f"F = {F_max:g}")
        ax.legend()
        return _save(fig, path)


def plot_truss(
    rows: Sequence[dict],
    path: str | Path,
    nodes: Sequence[tuple[float, float]],
    edges: Sequence[tuple[int, int]],
    scale: float = 1.0,
) -> Path:
    """Natural and deformed shapes for each load in the file."""
    by_F: dict[float, list[dict]] = defaultdict(list)
    for r in rows:
        by_F[_f(r["F"])].append(r)
    with _style() as (fig, ax):
        for i, j in edges:
            ax.plot([nodes[i][0], nodes[j][0]], [nodes[i][1], nodes[j][1]], color="0.75", lw=0.8)
        for n, (F, sel) in enumerate(sorted(by_F.items())):
            sel = sorted(sel, key=lambda r: int(r["node"]))
            for key, marker in (("exact", "x"), ("method", "o")):
                xs = [nodes[int(r["node"])][0] + scale * _f(r[f"ux_{key}"]) for r in sel]
                ys = [nodes[int(r["node"])][1] + scale * _f(r[f"uy_{key}"]) for r in sel]
                ax.scatter(xs, ys, marker=marker, color=f"C{n}", s=18,
                           facecolors="none" if marker == "o" else None,
                           label=f"{key}, F={F:g}")
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend(fontsize=7)
        return _save(fig, path)


def plot_estimate(rows: Sequence[dict], path: str | Path) -> Path:
    """Qubit count against truncation order, one line per chain size."""
    by_N: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for r in rows:
        by_N[int(r["N"])].append((int(r["P"]), int(r["qubits"])))
    with _style() as (fig, ax):
        for N, pts in sorted(by_N.items()):
            P, q = zip(*sorted(pts))
            ax.plot(P, q, "o-", label=f"N={N}")
        ax.set_xlabel("truncation order P")
        ax.set_ylabel("qubits")
        ax.legend()
        return _save(fig, path)
