"""Figures and summary tables rendered from a benchmark CSV."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchRecord, parse_csv, summarize, summary_csv  # noqa: E402
from .formats import parse_scalar  # noqa: E402

GROUP_BY = ("family", "metric", "m", "eps")


def _inv_eps(r: BenchRecord) -> float:
    return 1 / parse_scalar(r.eps, "float") if r.eps else math.nan


def plot_ratio_vs_eps(rows: Sequence[BenchRecord], path: Path) -> None:
    """Mean performance ratio against 1/eps, one line per (family, metric, m)."""
    series: Dict[tuple, Dict[float, List[float]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r.valid and r.eps:
            series[(r.family, r.metric, r.m or "")][_inv_eps(r)].append(r.ratio)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (fam, metric, m), pts in sorted(series.items()):
        xs = sorted(pts)
        ys = [sum(pts[x]) / len(pts[x]) for x in xs]
        label = f"{fam} {metric}" + (f" m={m}" if m else "")
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xscale("log")
    ax.set_xlabel("1/eps")
    ax.set_ylabel("mean CHD / OPT")
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_calls_vs_opt(rows: Sequence[BenchRecord], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    by_family = defaultdict(list)
    for r in rows:
        by_family[r.family].append(r)
    for fam, rs in sorted(by_family.items()):
        ax.scatter([r.opt_size for r in rs], [r.chd_calls for r in rs], s=10,
                   alpha=0.6, label=fam)
    ax.set_xlabel("opt size")
    ax.set_ylabel("Comb calls")
    ax.grid(True, alpha=0.3)
    if by_family:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(csv_path, out_dir, group_by: Sequence[str] = GROUP_BY) -> List[Path]:
    """Write ``summary.csv``, ``ratio_vs_eps.png`` and ``calls_vs_opt.png``."""
    rows = parse_csv(Path(csv_path).read_text())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = out / "summary.csv"
    summary.write_text(summary_csv(summarize(rows, group_by), group_by))
    fig1, fig2 = out / "ratio_vs_eps.png", out / "calls_vs_opt.png"
    plot_ratio_vs_eps(rows, fig1)
    plot_calls_vs_opt(rows, fig2)
    return [summary, fig1, fig2]
