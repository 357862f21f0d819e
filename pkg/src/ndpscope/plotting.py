"""Optional PNG figures rendered next to the CSV/JSON outputs.

Uses the non-interactive Agg backend and strips PNG metadata so repeated runs
write identical bytes.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.dpi": 100,
    "font.size": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
}
PRESET_COLORS = {"host": "tab:blue", "hostpf": "tab:orange", "ndp": "tab:green"}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def _grid(n: int):
    cols = min(3, n)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 2.6 * rows), squeeze=False)
    for ax in axes.flat[n:]:
        ax.set_visible(False)
    return fig, list(axes.flat)


def scalability(reports, path) -> Path:
    """Relative throughput against core count, one panel per function."""
    with plt.rc_context(STYLE):
        fig, axes = _grid(len(reports))
        for ax, rep in zip(axes, reports):
            for name in ("host", "hostpf", "ndp"):
                pts = sorted((p for p in rep.points if p.preset == name), key=lambda p: p.core_count)
                if pts:
                    ax.plot([p.core_count for p in pts], [p.rel_throughput for p in pts], marker="o",
                            ms=3, color=PRESET_COLORS[name], label=name)
            ax.set_xscale("log", base=2)
            ax.set_yscale("log")
            ax.set_title(f"{rep.name} ({rep.label})")
            ax.set_xlabel("cores")
            ax.set_ylabel("throughput vs 1-core host")
        axes[0].legend()
        fig.tight_layout()
        return _save(fig, path)


def energy(reports, path) -> Path:
    """Stacked energy components for Host and NDP at each function's smallest core count."""
    parts = ("l1_pj", "l2_pj", "l3_pj", "dram_pj", "link_pj")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4, 1.1 * len(reports)), 3))
        labels, stacks = [], []
        for rep in reports:
            c0 = min(p.core_count for p in rep.points)
            for name in ("host", "ndp"):
                pts = [p for p in rep.points if p.preset == name and p.core_count == c0]
                if pts:
                    e = pts[0].energy.to_dict()
                    total = pts[0].energy.total_pj or 1.0
                    labels.append(f"{rep.name}\n{name}")
                    stacks.append([e[k] / total for k in parts])
        bottom = [0.0] * len(stacks)
        for j, key in enumerate(parts):
            vals = [s[j] for s in stacks]
            ax.bar(range(len(stacks)), vals, bottom=bottom, label=key[:-3])
            bottom = [b + v for b, v in zip(bottom, vals)]
        ax.set_xticks(range(len(labels)), labels, fontsize=6)
        ax.set_ylabel("fraction of total energy")
        ax.legend(fontsize=6, ncol=5, loc="upper center", bbox_to_anchor=(0.5, 1.15))
        fig.tight_layout()
        return _save(fig, path)


def speedup(reports, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        for rep in reports:
            if rep.speedup:
                ax.plot(rep.speedup.core_counts, rep.speedup.speedup, marker="o", ms=3, label=rep.name)
        ax.axhline(1.0, color="k", lw=0.8)
        ax.set_xscale("log", base=2)
        ax.set_xlabel("cores")
        ax.set_ylabel("NDP / host speedup")
        ax.legend(fontsize=6)
        fig.tight_layout()
        return _save(fig, path)


def roofline(reports, path) -> Path:
    """AI against achieved throughput for every sweep point."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        for rep in reports:
            for name in ("host", "ndp"):
                pts = [p for p in rep.points if p.preset == name]
                ax.scatter([p.metrics.ai for p in pts], [p.throughput_ipc for p in pts], s=8,
                           marker="o" if name == "host" else "^", color=PRESET_COLORS[name])
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("arithmetic intensity (ops / L1 access)")
        ax.set_ylabel("aggregate IPC")
        fig.tight_layout()
        return _save(fig, path)


def hops(hist, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 2.8))
        items = sorted(hist.bins.items())
        ax.bar([h for h, _ in items], [f for _, f in items])
        ax.set_xlabel("hops")
        ax.set_ylabel("fraction of requests")
        fig.tight_layout()
        return _save(fig, path)


def blocks(report, path, top: int = 30) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        shown = report.blocks[:top]
        ax.bar(range(len(shown)), [n / report.total_misses for _, n in shown])
        ax.plot(range(len(shown)), report.cumulative[:top], color="k", marker=".", ms=3)
        ax.set_xticks(range(len(shown)), [str(b) for b, _ in shown], fontsize=6, rotation=90)
        ax.set_xlabel("basic block")
        ax.set_ylabel("share of LLC misses")
        ax.set_ylim(0, 1.05)
        fig.tight_layout()
        return _save(fig, path)


def kmeans_scatter(names: Sequence[str], points, assignments: Sequence[int], path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.5, 3.2))
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.scatter(xs, ys, c=list(assignments), cmap="tab10", vmin=0, vmax=9, s=16)
        for name, x, y in zip(names, xs, ys):
            ax.annotate(name, (x, y), fontsize=6, xytext=(2, 2), textcoords="offset points")
        ax.set_xlabel("spatial locality")
        ax.set_ylabel("temporal locality")
        fig.tight_layout()
        return _save(fig, path)


def dendrogram(dend, path) -> Path:
    """Classic U-link drawing; leaves ordered by a left-first walk."""
    order = []

    def walk(node):
        if node < dend.n:
            order.append(node)
        else:
            a, b, _ = dend.merges[node - dend.n]
            walk(a)
            walk(b)

    walk(2 * dend.n - 2)
    xpos = {leaf: i for i, leaf in enumerate(order)}

    def x_of(node):
        if node < dend.n:
            return xpos[node]
        a, b, _ = dend.merges[node - dend.n]
        return (x_of(a) + x_of(b)) / 2

    with plt.rc_context({**STYLE, "axes.grid": False}):
        fig, ax = plt.subplots(figsize=(max(4, 0.35 * dend.n), 3))
        for a, b, h in dend.merges:
            xa, xb = x_of(a), x_of(b)
            ax.plot([xa, xa, xb, xb], [dend.height(a), h, h, dend.height(b)], color="k", lw=0.8)
        ax.set_xticks(range(dend.n), [dend.labels[i] for i in order], rotation=90, fontsize=6)
        ax.set_ylabel("linkage distance")
        fig.tight_layout()
        return _save(fig, path)
