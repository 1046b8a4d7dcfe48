"""Figure rendering for sweep tables.

Optional companion to the CSV output: given a sweep table, write small
matplotlib figures next to the delimited results.  Import stays inside
the render functions so plain CSV runs never touch matplotlib.
"""
from __future__ import annotations

from pathlib import Path

from .scenario import ALPHA_SWEEP_HEADER, DRIVER_SWEEP_HEADER, SweepTable


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_driver_sweep(table: SweepTable, outdir: Path, stem: str = "sweep_drivers") -> list[Path]:
    if table.header != DRIVER_SWEEP_HEADER:
        raise ValueError("expected a driver-sweep table")
    plt = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d = [row[0] for row in table.rows]
    profit = [row[2] for row in table.rows]
    welfare = [row[3] for row in table.rows]
    eq_profit = [row[4] for row in table.rows]

    paths = []
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(d, profit, marker="o", ms=3, label="profit ratio")
    ax.plot(d, welfare, marker="s", ms=3, label="welfare ratio")
    ax.set_xlabel("drivers")
    ax.set_ylabel("optimum / equilibrium")
    ax.grid(True, ls=":", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    p = outdir / f"{stem}_ratios.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(d, eq_profit, marker="o", ms=3, color="tab:green")
    ax.set_xlabel("drivers")
    ax.set_ylabel("equilibrium profit per driver")
    ax.grid(True, ls=":", alpha=0.5)
    fig.tight_layout()
    p = outdir / f"{stem}_eq_profit.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)
    return paths


def render_alpha_sweep(table: SweepTable, outdir: Path, stem: str = "sweep_alpha") -> list[Path]:
    if table.header != ALPHA_SWEEP_HEADER:
        raise ValueError("expected an alpha-sweep table")
    plt = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series: dict[str, tuple[list[float], list[float]]] = {}
    for alpha, algo, _value, ratio in table.rows:
        xs, ys = series.setdefault(algo, ([], []))
        xs.append(alpha)
        ys.append(ratio)

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    for algo, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", ms=3, label=algo)
    ax.set_xlabel("centrally controlled share")
    ax.set_ylabel("optimum / achieved")
    ax.grid(True, ls=":", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    p = outdir / f"{stem}_ratios.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return [p]
