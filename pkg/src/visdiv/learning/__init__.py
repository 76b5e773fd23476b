"""Classifiers, regressor, evaluation protocols, and agreement metrics."""

from .metrics import (
    Confusion,
    classwise_f1,
    confusion_matrix,
    krippendorff_alpha,
    load_agreement_table,
    rmse,
    spearman,
    weighted_f1,
)
from .models import (
    GradientBoostedTreesRegressor,
    LogisticRegressionClassifier,
    RandomForestClassifier,
)
from .protocol import (
    DEFAULT_GRIDS,
    EvalReport,
    ModelKind,
    ModelSpec,
    RegressionReport,
    grid_search,
    kfold_classify,
    mc_regress,
    stratified_folds,
)

__all__ = [
    "Confusion",
    "confusion_matrix",
    "classwise_f1",
    "weighted_f1",
    "spearman",
    "rmse",
    "krippendorff_alpha",
    "load_agreement_table",
    "RandomForestClassifier",
    "LogisticRegressionClassifier",
    "GradientBoostedTreesRegressor",
    "ModelKind",
    "ModelSpec",
    "EvalReport",
    "RegressionReport",
    "DEFAULT_GRIDS",
    "kfold_classify",
    "grid_search",
    "mc_regress",
    "stratified_folds",
]
