"""Static figures accompanying the delimited outputs.

Every ``analyze`` subcommand writes machine-readable CSV/JSON first and a
PNG chart of the same series next to it.  Figures are intentionally plain:
Agg backend, default style, one chart per file.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .correlation import CorrelationResult
from .gains import GainSummary
from .powerlaw import PowerLawFit

__all__ = ["scaling_figure", "gains_figure", "pareto_figure", "agreement_figure"]


def scaling_figure(series: dict[str, tuple[list[float], list[float], PowerLawFit]], path: str | Path) -> Path:
    """Log-log scatter per series with its fitted line."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, (x, y, fit) in sorted(series.items()):
        points = ax.loglog(x, y, "o", label=f"{label} (b={fit.b:.3f}, R2={fit.r2_log:.3f})")
        grid = np.geomspace(min(x), max(x), 64)
        ax.loglog(grid, fit.a * grid**fit.b, "--", color=points[0].get_color(), alpha=0.7)
    ax.set_xlabel("training samples")
    ax.set_ylabel("score")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def gains_figure(summary: GainSummary, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    xs = [p.baseline for p in summary.points]
    ys = [p.gain for p in summary.points]
    ax.scatter(xs, ys, s=18, alpha=0.7, label="observed gain")
    ceiling_x = np.linspace(min(xs + [0.0]), 1.0, 64)
    ax.plot(ceiling_x, 1.0 - ceiling_x, "k--", alpha=0.6, label="ceiling 1 - x")
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.set_xlabel("baseline similarity")
    ax.set_ylabel("gain")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def pareto_figure(
    points: list[tuple[float, float, str]],
    frontier: list[tuple[float, float]],
    path: str | Path,
) -> Path:
    """points are (size, score, label); the frontier is drawn as a step line."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    front = set(frontier)
    for size, score, label in points:
        on_front = (size, score) in front
        ax.scatter([size], [score], s=42 if on_front else 24, c="tab:blue" if on_front else "tab:gray")
        ax.annotate(label, (size, score), textcoords="offset points", xytext=(5, 4), fontsize=8)
    if frontier:
        fx, fy = zip(*sorted(frontier))
        ax.step(fx, fy, where="post", color="tab:blue", alpha=0.6)
    ax.set_xlabel("model size")
    ax.set_ylabel("score")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def agreement_figure(pairs: dict[tuple[str, str], CorrelationResult], path: str | Path) -> Path:
    """Grouped bars of pearson/spearman/kendall per report pair."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    labels = [f"{a}\nvs {b}" for a, b in pairs]
    metrics = ("pearson", "spearman", "kendall_tau_b")
    width = 0.25
    xs = np.arange(len(labels))
    for i, metric in enumerate(metrics):
        values = [getattr(r, metric) if getattr(r, metric) is not None else 0.0 for r in pairs.values()]
        ax.bar(xs + (i - 1) * width, values, width, label=metric.replace("_", " "))
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(-1.0, 1.0)
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.set_ylabel("correlation")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
