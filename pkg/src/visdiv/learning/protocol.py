"""Evaluation protocols: stratified k-fold classification, exhaustive grid
search, and Monte Carlo 80:20 regression splits. All shuffles derive from
seeded generators, and per-fold/per-split streams are independent of
execution order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConstantInputError, ValidationError
from .metrics import Confusion, classwise_f1, confusion_matrix, rmse, spearman, weighted_f1
from .models import (
    GradientBoostedTreesRegressor,
    LogisticRegressionClassifier,
    RandomForestClassifier,
)


class ModelKind(str, Enum):
    RANDOM_FOREST = "RandomForest"
    LOGISTIC_REGRESSION = "LogisticRegression"
    GRADIENT_BOOSTED_TREES = "GradientBoostedTrees"


_ALLOWED_PARAMS = {
    ModelKind.RANDOM_FOREST: {"n_estimators", "max_depth", "min_samples_split",
                              "min_samples_leaf", "max_features"},
    ModelKind.LOGISTIC_REGRESSION: {"l2", "learning_rate", "max_iter"},
    ModelKind.GRADIENT_BOOSTED_TREES: {"n_estimators", "learning_rate", "max_depth",
                                       "min_samples_split", "min_samples_leaf"},
}

DEFAULT_GRIDS = {
    ModelKind.RANDOM_FOREST: {
        "n_estimators": [100, 300],
        "max_depth": [None, 8, 16],
        "min_samples_split": [2, 5],
        "min_samples_leaf": [1, 3],
        "max_features": ["sqrt", None],
    },
    ModelKind.LOGISTIC_REGRESSION: {"l2": [1e-3, 1e-2, 1e-1]},
    ModelKind.GRADIENT_BOOSTED_TREES: {
        "n_estimators": [100, 300],
        "learning_rate": [0.05, 0.1],
        "max_depth": [2, 3],
    },
}


@dataclass
class ModelSpec:
    kind: ModelKind
    hyper_params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        extra = set(self.hyper_params) - _ALLOWED_PARAMS[self.kind]
        if extra:
            raise ValidationError(
                f"unknown hyper-parameters for {self.kind.value}: {sorted(extra)}"
            )


@dataclass
class EvalReport:
    weighted_f1: float
    per_class_f1: dict[str, float]
    fold_scores: list[float]
    confusion: Confusion
    best_params: dict

    def to_dict(self) -> dict:
        return {
            "weighted_f1": self.weighted_f1,
            "per_class_f1": dict(self.per_class_f1),
            "fold_scores": list(self.fold_scores),
            "confusion": self.confusion.to_dict(),
            "best_params": {k: v for k, v in self.best_params.items()},
        }


@dataclass
class RegressionReport:
    spearman_rho: float
    rmse: float
    split_scores: list[dict]
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "spearman_rho": self.spearman_rho,
            "rmse": self.rmse,
            "split_scores": list(self.split_scores),
            "flags": list(self.flags),
        }


def make_model(spec: ModelSpec, fold_seed: int):
    params = dict(spec.hyper_params)
    if spec.kind is ModelKind.RANDOM_FOREST:
        return RandomForestClassifier(seed=fold_seed, **params)
    if spec.kind is ModelKind.LOGISTIC_REGRESSION:
        return LogisticRegressionClassifier(seed=fold_seed, **params)
    return GradientBoostedTreesRegressor(seed=fold_seed, **params)


def _derived_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index])
    return int(ss.generate_state(1)[0])


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified fold assignment; returns k test-index arrays."""
    labels = list(labels)
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValidationError("stratified folds need at least two classes")
    counts = {c: labels.count(c) for c in classes}
    thin = [f"{c} ({n})" for c, n in counts.items() if n < k]
    if thin:
        raise ValidationError(f"classes with fewer than k={k} samples: {', '.join(thin)}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF])))
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in classes:
        idx = np.asarray([i for i, l in enumerate(labels) if l == c])
        idx = idx[rng.permutation(len(idx))]
        for f in range(k):
            folds[f].extend(idx[f::k].tolist())
    return [np.asarray(sorted(f), dtype=np.int64) for f in folds]


def _samples_to_xy(samples):
    X = np.stack([np.asarray(s.vector, dtype=np.float64) for s in samples])
    labels = [s.class_label for s in samples]
    if any(l is None for l in labels):
        raise ValidationError("every sample needs a class_label for classification")
    return X, labels


def kfold_classify(samples, spec: ModelSpec, k: int = 5, seed: int = 0) -> EvalReport:
    """Stratified k-fold cross-validation. The report aggregates out-of-fold
    predictions into a single confusion matrix; fold_scores carries the
    per-fold weighted F1. Deterministic for fixed (samples, spec, k, seed).
    """
    X, labels = _samples_to_xy(samples)
    test_folds = stratified_folds(labels, k, seed)
    all_idx = np.arange(len(labels))
    oof_pred: dict[int, str] = {}
    fold_scores: list[float] = []
    label_list = sorted(set(labels))
    for f, test_idx in enumerate(test_folds):
        train_mask = np.ones(len(labels), dtype=bool)
        train_mask[test_idx] = False
        train_idx = all_idx[train_mask]
        model = make_model(spec, _derived_seed(spec.seed, f))
        model.fit(X[train_idx], [labels[i] for i in train_idx])
        preds = model.predict(X[test_idx])
        for i, p in zip(test_idx, preds):
            oof_pred[int(i)] = p
        fold_conf = confusion_matrix([labels[i] for i in test_idx], preds, labels=label_list)
        fold_scores.append(weighted_f1(fold_conf))
    pred_list = [oof_pred[i] for i in range(len(labels))]
    conf = confusion_matrix(labels, pred_list, labels=label_list)
    return EvalReport(
        weighted_f1=weighted_f1(conf),
        per_class_f1=classwise_f1(conf),
        fold_scores=fold_scores,
        confusion=conf,
        best_params=dict(spec.hyper_params),
    )


def grid_search(samples, kind: ModelKind, grid: dict, k: int = 5, seed: int = 0):
    """Exhaustive search over the grid (axes iterated in declared order); each
    configuration is scored by k-fold weighted F1. Ties keep the first
    configuration in grid order. Returns (best ModelSpec, its EvalReport).
    """
    if not grid:
        raise ValidationError("empty hyper-parameter grid")
    keys = list(grid.keys())
    best: tuple[ModelSpec, EvalReport] | None = None
    for combo in itertools.product(*(grid[key] for key in keys)):
        spec = ModelSpec(kind=kind, hyper_params=dict(zip(keys, combo)), seed=seed)
        report = kfold_classify(samples, spec, k=k, seed=seed)
        if best is None or report.weighted_f1 > best[1].weighted_f1:
            best = (spec, report)
    return best


def mc_regress(samples, spec: ModelSpec | None = None, splits: int = 20,
               ratio: float = 0.8, seed: int = 0) -> RegressionReport:
    """Monte Carlo cross-validation for rating regression: ``splits``
    independent seeded 80:20 splits, averaging Spearman rho and RMSE.
    Constant predictions or targets make rho undefined; such splits
    contribute 0 and set a flag.
    """
    if len(samples) < 10:
        raise ValidationError(f"need at least 10 samples, got {len(samples)}")
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    if spec is None:
        spec = ModelSpec(kind=ModelKind.GRADIENT_BOOSTED_TREES, seed=seed)
    if spec.kind is not ModelKind.GRADIENT_BOOSTED_TREES:
        raise ValidationError("regression uses GradientBoostedTrees")
    X = np.stack([np.asarray(s.vector, dtype=np.float64) for s in samples])
    ratings = [s.rating for s in samples]
    if any(r is None for r in ratings):
        raise ValidationError("every sample needs a rating for regression")
    y = np.asarray(ratings, dtype=np.float64)

    n = len(y)
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    split_scores: list[dict] = []
    flags: list[str] = []
    rhos: list[float] = []
    errs: list[float] = []
    for s in range(splits):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, s])))
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
        model = make_model(spec, _derived_seed(spec.seed, s))
        model.fit(X[train], y[train])
        pred = model.predict(X[test])
        err = rmse(pred, y[test])
        try:
            rho = spearman(pred, y[test])
        except ConstantInputError:
            rho = 0.0
            flags.append(f"spearman_undefined_split_{s}")
        rhos.append(rho)
        errs.append(err)
        split_scores.append({"split": s, "spearman_rho": rho, "rmse": err})
    return RegressionReport(
        spearman_rho=float(np.mean(rhos)),
        rmse=float(np.mean(errs)),
        split_scores=split_scores,
        flags=tuple(flags),
    )
