"""CART decision trees, the shared building block of the forest and the
booster. Splits are exhaustive over sorted feature values with thresholds at
midpoints; all tie-breaks are deterministic (first candidate feature, lowest
split position).
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    m = int(max_features)
    if not 1 <= m <= n_features:
        raise ValidationError(f"max_features {max_features!r} out of range for {n_features} features")
    return m


class DecisionTree:
    """Binary CART tree.

    task "classify": Gini impurity, leaves store class-count distributions.
    task "regress": squared error, leaves store means.
    """

    def __init__(self, task: str, max_depth=None, min_samples_split: int = 2,
                 min_samples_leaf: int = 1, max_features=None,
                 rng: np.random.Generator | None = None, n_classes: int = 0):
        if task not in ("classify", "regress"):
            raise ValidationError(f"unknown tree task {task!r}")
        if task == "classify" and n_classes < 2:
            raise ValidationError("classification tree needs n_classes >= 2")
        self.task = task
        self.max_depth = np.inf if max_depth is None else int(max_depth)
        self.min_samples_split = max(2, int(min_samples_split))
        self.min_samples_leaf = max(1, int(min_samples_leaf))
        self.max_features = max_features
        self.rng = rng
        self.n_classes = n_classes
        self.feature: np.ndarray | None = None

    # -- fitting ------------------------------------------------------------

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        n, d = X.shape
        m_feat = resolve_max_features(self.max_features, d)

        features: list[int] = []
        thresholds: list[float] = []
        lefts: list[int] = []
        rights: list[int] = []
        values: list[np.ndarray | float] = []

        def leaf_value(idx):
            if self.task == "classify":
                counts = np.bincount(y[idx], minlength=self.n_classes).astype(np.float64)
                return counts / counts.sum()
            return float(y[idx].mean())

        def new_node():
            features.append(-1)
            thresholds.append(0.0)
            lefts.append(-1)
            rights.append(-1)
            values.append(None)
            return len(features) - 1

        stack = [(new_node(), np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            if (depth >= self.max_depth or len(idx) < self.min_samples_split
                    or self._is_pure(y[idx])):
                values[node] = leaf_value(idx)
                continue
            split = self._best_split(X, y, idx, m_feat)
            if split is None:
                values[node] = leaf_value(idx)
                continue
            feat, thr, left_mask = split
            features[node] = feat
            thresholds[node] = thr
            left_id, right_id = new_node(), new_node()
            lefts[node] = left_id
            rights[node] = right_id
            stack.append((right_id, idx[~left_mask], depth + 1))
            stack.append((left_id, idx[left_mask], depth + 1))

        self.feature = np.asarray(features, dtype=np.int64)
        self.threshold = np.asarray(thresholds)
        self.left = np.asarray(lefts, dtype=np.int64)
        self.right = np.asarray(rights, dtype=np.int64)
        if self.task == "classify":
            self.value = np.zeros((len(features), self.n_classes))
            for i, v in enumerate(values):
                if v is not None:
                    self.value[i] = v
        else:
            self.value = np.asarray([0.0 if v is None else v for v in values])
        return self

    def _is_pure(self, y_node) -> bool:
        return bool((y_node == y_node[0]).all())

    def _candidate_features(self, d: int, m_feat: int) -> np.ndarray:
        if m_feat >= d:
            return np.arange(d)
        if self.rng is None:
            raise ValidationError("feature subsampling requires an rng")
        return self.rng.choice(d, size=m_feat, replace=False)

    def _best_split(self, X, y, idx, m_feat):
        n = len(idx)
        best_score = -np.inf
        best = None
        lo = self.min_samples_leaf
        hi = n - self.min_samples_leaf
        if hi < lo:
            return None
        for feat in self._candidate_features(X.shape[1], m_feat):
            xs = X[idx, feat]
            order = np.argsort(xs, kind="mergesort")
            xs_sorted = xs[order]
            valid = np.zeros(n + 1, dtype=bool)
            valid[lo:hi + 1] = True
            valid[1:n] &= xs_sorted[1:] > xs_sorted[:-1]
            valid[0] = valid[n] = False
            if not valid.any():
                continue
            pos = np.nonzero(valid)[0]
            left_n = pos.astype(np.float64)
            right_n = n - left_n
            if self.task == "classify":
                onehot = np.zeros((n, self.n_classes))
                onehot[np.arange(n), y[idx][order]] = 1.0
                cum = np.vstack([np.zeros(self.n_classes), np.cumsum(onehot, axis=0)])
                left_ss = (cum[pos] ** 2).sum(axis=1)
                right_ss = ((cum[n] - cum[pos]) ** 2).sum(axis=1)
            else:
                ys = y[idx][order].astype(np.float64)
                cum = np.concatenate([[0.0], np.cumsum(ys)])
                left_ss = cum[pos] ** 2
                right_ss = (cum[n] - cum[pos]) ** 2
            scores = left_ss / left_n + right_ss / right_n
            j = int(scores.argmax())
            if scores[j] > best_score:
                p = pos[j]
                best_score = float(scores[j])
                thr = (xs_sorted[p - 1] + xs_sorted[p]) / 2.0
                if thr >= xs_sorted[p]:
                    # midpoint of adjacent floats rounded up; fall back to the left value
                    thr = xs_sorted[p - 1]
                best = (int(feat), float(thr), xs <= thr)
        return best

    # -- prediction ----------------------------------------------------------

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                return node
            rows = np.nonzero(internal)[0]
            cur = node[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.task == "classify":
            return self.predict_proba(X).argmax(axis=1)
        return self.value[self.apply(X)]
