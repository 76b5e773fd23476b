"""Evaluation metrics: confusion-matrix F1 scores, Spearman rank correlation,
RMSE, and nominal Krippendorff alpha for annotation agreement."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConstantInputError, ValidationError


@dataclass
class Confusion:
    labels: tuple[str, ...]
    counts: np.ndarray               # rows = true label, cols = predicted

    def support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels),
                "counts": [[int(v) for v in row] for row in self.counts]}


def confusion_matrix(y_true, y_pred, labels=None) -> Confusion:
    if len(y_true) != len(y_pred):
        raise ValidationError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred))
    lookup = {l: i for i, l in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[lookup[t], lookup[p]] += 1
    return Confusion(labels=tuple(labels), counts=counts)


def classwise_f1(conf: Confusion) -> dict[str, float]:
    """Per-class F1 (harmonic mean of precision and recall, 0 when undefined)."""
    if conf.counts.sum() == 0:
        raise ValidationError("all-zero confusion matrix")
    out: dict[str, float] = {}
    for i, label in enumerate(conf.labels):
        tp = conf.counts[i, i]
        denom = 2 * tp + (conf.counts[:, i].sum() - tp) + (conf.counts[i, :].sum() - tp)
        out[label] = float(2 * tp / denom) if denom > 0 else 0.0
    return out


def weighted_f1(conf: Confusion) -> float:
    """Support-weighted mean of the per-class F1 scores."""
    f1s = classwise_f1(conf)
    support = conf.support().astype(np.float64)
    total = support.sum()
    if total == 0:
        raise ValidationError("confusion matrix has no true samples")
    return float(sum(f1s[l] * support[i] for i, l in enumerate(conf.labels)) / total)


def _midranks(a: np.ndarray) -> np.ndarray:
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    ranks = np.empty(len(a))
    boundaries = np.nonzero(np.diff(sorted_a))[0] + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [len(a)]))
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + e + 1) / 2.0     # mean of 1-based ranks s+1..e
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation of mid-ranks (average ranks on ties)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValidationError(f"need two equal-length 1-d sequences of length >= 2, got {x.shape} and {y.shape}")
    rx, ry = _midranks(x), _midranks(y)
    sx, sy = rx.std(), ry.std()
    if sx == 0.0 or sy == 0.0:
        raise ConstantInputError("spearman is undefined for constant input")
    return float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))


def rmse(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or len(pred) < 1:
        raise ValidationError(f"need equal-length non-empty sequences, got {pred.shape} and {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def krippendorff_alpha(table) -> float:
    """Nominal-level alpha over an items x raters table with missing values.

    Uses the pairable-values (coincidence matrix) formulation: only items with
    at least two values contribute. alpha = 1 - Do/De; a table with zero
    expected disagreement (one category everywhere) is perfect agreement.
    """
    units = []
    for row in table:
        vals = [str(v) for v in row if v is not None and str(v).strip() != ""]
        if len(vals) >= 2:
            units.append(vals)
    if not units:
        raise ValidationError("no item has two or more pairable values")
    categories = sorted({v for unit in units for v in unit})
    index = {c: i for i, c in enumerate(categories)}
    c = len(categories)
    coincidence = np.zeros((c, c))
    for unit in units:
        m = len(unit)
        counts = np.zeros(c)
        for v in unit:
            counts[index[v]] += 1
        coincidence += (np.outer(counts, counts) - np.diag(counts)) / (m - 1)
    n = coincidence.sum()
    marginals = coincidence.sum(axis=1)
    observed = (n - np.trace(coincidence)) / n
    expected = (n * n - (marginals ** 2).sum()) / (n * (n - 1))
    if expected == 0.0:
        return 1.0
    return float(1.0 - observed / expected)


def load_agreement_table(path) -> list[list[str | None]]:
    """CSV grid: rows are items, columns are raters, empty cells are missing."""
    path = Path(path)
    table: list[list[str | None]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            table.append([c.strip() if c.strip() else None for c in row])
    if not table:
        raise ValidationError(f"{path}: empty agreement table")
    return table
