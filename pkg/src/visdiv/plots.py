"""Static SVG figures rendered next to the delimited report output.

Figures are deterministic: fixed hash salt, no embedded creation date, text as
paths. Re-running an identical configuration reproduces identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "visdiv"

CLASS_COLORS = {"Abstract": "#7b9fd4", "Concrete": "#d4847b"}


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def score_bars(scores: dict[str, float], path, title: str, ylabel: str,
               ylim: tuple[float, float] | None = (0.0, 1.0)) -> None:
    """One bar per feature set (weighted F1, Spearman rho, ...)."""
    names = list(scores.keys())
    values = [scores[n] for n in names]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(names)), 3.2))
    ax.bar(np.arange(len(names)), values, color="#5a7d9a")
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if ylim:
        ax.set_ylim(*ylim)
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def classwise_bars(per_attr: dict[str, dict[str, float]], path, title: str,
                   ylabel: str, ylim: tuple[float, float] | None = (0.0, 1.0)) -> None:
    """Grouped bars per feature set, one bar per class."""
    names = list(per_attr.keys())
    classes = sorted({c for v in per_attr.values() for c in v})
    width = 0.8 / max(1, len(classes))
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(names)), 3.2))
    xs = np.arange(len(names))
    for ci, cls in enumerate(classes):
        vals = [per_attr[n].get(cls, 0.0) for n in names]
        ax.bar(xs + ci * width, vals, width, label=cls,
               color=CLASS_COLORS.get(cls, f"C{ci}"))
    ax.set_xticks(xs + width * (len(classes) - 1) / 2)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if ylim:
        ax.set_ylim(*ylim)
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def class_heatmap(rows: list[str], cols: list[str], matrix, path, title: str,
                  fmt: str = "{:.2f}") -> None:
    """Attribute x class heatmap with annotated cells."""
    m = np.asarray(matrix, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(2.0 + 0.9 * len(cols), 0.9 + 0.38 * len(rows)))
    im = ax.imshow(m, cmap="viridis", aspect="auto")
    ax.set_xticks(np.arange(len(cols)))
    ax.set_xticklabels(cols, fontsize=8)
    ax.set_yticks(np.arange(len(rows)))
    ax.set_yticklabels(rows, fontsize=8)
    mid = (np.nanmax(m) + np.nanmin(m)) / 2 if m.size else 0.0
    for i in range(len(rows)):
        for j in range(len(cols)):
            color = "white" if m[i, j] < mid else "black"
            ax.text(j, i, fmt.format(m[i, j]), ha="center", va="center",
                    fontsize=7, color=color)
    ax.set_title(title, fontsize=10)
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    _save(fig, path)
