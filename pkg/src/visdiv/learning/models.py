"""Native model implementations: bagged CART forest (Gini), L2 logistic
regression fit by full-batch gradient descent, and least-squares gradient
boosting with shrinkage.

Per-tree RNG streams are derived from (seed, tree index), so training order
never affects results.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .trees import DecisionTree


def _encode_labels(y):
    classes = sorted(set(y))
    if len(classes) < 2:
        raise ValidationError("need at least two classes")
    lookup = {c: i for i, c in enumerate(classes)}
    return classes, np.asarray([lookup[v] for v in y], dtype=np.int64)


def _tree_rng(seed: int, index: int) -> np.random.Generator:
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, index]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # exponentiate negative magnitudes only, so large scores never overflow
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class RandomForestClassifier:
    def __init__(self, n_estimators: int = 100, max_depth=None, min_samples_split: int = 2,
                 min_samples_leaf: int = 1, max_features="sqrt", seed: int = 0):
        self.n_estimators = int(n_estimators)
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = int(seed)
        self.trees: list[DecisionTree] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.classes_, yi = _encode_labels(y)
        n = len(yi)
        self.trees = []
        for t in range(self.n_estimators):
            rng = _tree_rng(self.seed, t)
            boot = rng.integers(0, n, size=n)
            tree = DecisionTree("classify", max_depth=self.max_depth,
                                min_samples_split=self.min_samples_split,
                                min_samples_leaf=self.min_samples_leaf,
                                max_features=self.max_features, rng=rng,
                                n_classes=len(self.classes_))
            tree.fit(X[boot], yi[boot])
            self.trees.append(tree)
        return self

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        total = np.zeros((len(X), len(self.classes_)))
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)

    def predict(self, X):
        idx = self.predict_proba(X).argmax(axis=1)
        return [self.classes_[i] for i in idx]


class LogisticRegressionClassifier:
    """Binary L2-regularized logistic regression.

    Features are standardized internally (training statistics) and the model
    is fit with a fixed budget of full-batch gradient steps, so results are
    deterministic and insensitive to feature scale.
    """

    def __init__(self, l2: float = 1e-3, learning_rate: float = 0.5,
                 max_iter: int = 500, seed: int = 0):
        self.l2 = float(l2)
        self.learning_rate = float(learning_rate)
        self.max_iter = int(max_iter)
        self.seed = int(seed)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.classes_, yi = _encode_labels(y)
        if len(self.classes_) != 2:
            raise ValidationError("logistic regression here is binary only")
        self.mean_ = X.mean(axis=0)
        std = X.std(axis=0)
        self.std_ = np.where(std > 0, std, 1.0)
        Xs = (X - self.mean_) / self.std_
        n, d = Xs.shape
        w = np.zeros(d)
        b = 0.0
        target = yi.astype(np.float64)
        for _ in range(self.max_iter):
            z = Xs @ w + b
            p = _sigmoid(z)
            err = p - target
            grad_w = Xs.T @ err / n + self.l2 * w
            grad_b = err.mean()
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights_ = w
        self.bias_ = b
        return self

    def decision_function(self, X):
        Xs = (np.asarray(X, dtype=np.float64) - self.mean_) / self.std_
        return Xs @ self.weights_ + self.bias_

    def predict(self, X):
        scores = self.decision_function(X)
        return [self.classes_[1] if s >= 0 else self.classes_[0] for s in scores]


class GradientBoostedTreesRegressor:
    """Least-squares boosting: start from the target mean, then repeatedly fit
    a shallow regression tree to the residuals and add it with shrinkage.

    ``train_losses_`` records the training MSE after every round; it is
    non-increasing for any learning rate in (0, 2).
    """

    def __init__(self, n_estimators: int = 100, learning_rate: float = 0.1,
                 max_depth: int = 3, min_samples_split: int = 2,
                 min_samples_leaf: int = 1, seed: int = 0):
        self.n_estimators = int(n_estimators)
        self.learning_rate = float(learning_rate)
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.seed = int(seed)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.base_ = float(y.mean())
        pred = np.full(len(y), self.base_)
        self.trees: list[DecisionTree] = []
        self.train_losses_: list[float] = []
        for _ in range(self.n_estimators):
            residual = y - pred
            tree = DecisionTree("regress", max_depth=self.max_depth,
                                min_samples_split=self.min_samples_split,
                                min_samples_leaf=self.min_samples_leaf)
            tree.fit(X, residual)
            pred = pred + self.learning_rate * tree.predict(X)
            self.trees.append(tree)
            self.train_losses_.append(float(np.mean((y - pred) ** 2)))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        pred = np.full(len(X), self.base_)
        for tree in self.trees:
            pred = pred + self.learning_rate * tree.predict(X)
        return pred
