import numpy as np
import pytest

from visdiv.diversity import ConceptSample
from visdiv.errors import ValidationError
from visdiv.learning import (
    GradientBoostedTreesRegressor,
    LogisticRegressionClassifier,
    ModelKind,
    ModelSpec,
    RandomForestClassifier,
    grid_search,
    kfold_classify,
    mc_regress,
    stratified_folds,
)
from visdiv.learning.trees import DecisionTree


def blob_samples(seed, n=200, d=10, sep=6.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    labels = []
    for i in range(n):
        if i % 2:
            X[i, 0] += sep
            labels.append("Concrete")
        else:
            labels.append("Abstract")
    return [ConceptSample(f"s{i}", labels[i], None, X[i], ()) for i in range(n)]


def relabel(samples, labels):
    return [ConceptSample(s.lemma, label, s.rating, s.vector, s.attribute_manifest)
            for s, label in zip(samples, labels)]


RF_FAST = {"n_estimators": 25}


class TestDecisionTree:
    def test_classification_perfect_split(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        tree = DecisionTree("classify", n_classes=2).fit(X, y)
        assert tree.predict(X).tolist() == [0, 0, 1, 1]
        assert tree.threshold[0] == pytest.approx(5.5)

    def test_regression_means(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([2.0, 2.0, 8.0, 10.0])
        tree = DecisionTree("regress", max_depth=1).fit(X, y)
        pred = tree.predict(X)
        assert pred[0] == pred[1] == pytest.approx(2.0)
        assert pred[2] == pred[3] == pytest.approx(9.0)

    def test_min_samples_leaf(self):
        X = np.arange(10, dtype=float)[:, None]
        y = np.array([0] * 9 + [1])
        tree = DecisionTree("classify", n_classes=2, min_samples_leaf=3).fit(X, y)
        leaves = tree.apply(X)
        counts = np.bincount(leaves, minlength=len(tree.feature))
        assert all(c == 0 or c >= 3 for c in counts[tree.feature == -1])


class TestRandomForest:
    def test_separable_data(self):
        samples = blob_samples(0)
        X = np.stack([s.vector for s in samples])
        y = [s.class_label for s in samples]
        model = RandomForestClassifier(n_estimators=20, seed=3).fit(X, y)
        assert model.predict(X) == y

    def test_deterministic_given_seed(self):
        samples = blob_samples(1)
        X = np.stack([s.vector for s in samples])
        y = [s.class_label for s in samples]
        a = RandomForestClassifier(n_estimators=10, seed=5).fit(X, y).predict_proba(X)
        b = RandomForestClassifier(n_estimators=10, seed=5).fit(X, y).predict_proba(X)
        assert np.array_equal(a, b)

    def test_positive_scaling_leaves_fold_predictions_unchanged(self):
        samples = blob_samples(2, n=80)
        spec = ModelSpec(ModelKind.RANDOM_FOREST, RF_FAST, seed=0)
        base = kfold_classify(samples, spec, k=5, seed=0)
        for c in (2.0, 0.5, 3.0):
            scaled = [ConceptSample(s.lemma, s.class_label, None, s.vector * c, ())
                      for s in samples]
            rep = kfold_classify(scaled, spec, k=5, seed=0)
            assert rep.confusion.to_dict() == base.confusion.to_dict()


class TestLogisticRegression:
    def test_separable_data(self):
        samples = blob_samples(3)
        X = np.stack([s.vector for s in samples])
        y = [s.class_label for s in samples]
        model = LogisticRegressionClassifier().fit(X, y)
        acc = np.mean([p == t for p, t in zip(model.predict(X), y)])
        assert acc >= 0.99

    def test_binary_only(self):
        X = np.zeros((6, 2))
        with pytest.raises(ValidationError):
            LogisticRegressionClassifier().fit(X, ["a", "b", "c", "a", "b", "c"])


class TestGbt:
    def test_training_loss_non_increasing(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(120, 6))
        y = X[:, 0] * 2 + np.sin(X[:, 1]) + rng.normal(0, 0.1, 120)
        model = GradientBoostedTreesRegressor(n_estimators=60).fit(X, y)
        losses = model.train_losses_
        assert all(losses[i] >= losses[i + 1] - 1e-12 for i in range(len(losses) - 1))

    def test_fits_smooth_function(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-2, 2, size=(300, 1))
        y = X[:, 0] ** 2
        model = GradientBoostedTreesRegressor(n_estimators=150).fit(X, y)
        pred = model.predict(X)
        assert np.mean((pred - y) ** 2) < 0.01


class TestFolds:
    def test_stratified_counts(self):
        labels = ["A"] * 17 + ["C"] * 23
        folds = stratified_folds(labels, 5, seed=0)
        all_idx = np.concatenate(folds)
        assert sorted(all_idx.tolist()) == list(range(40))
        for f in folds:
            a = sum(1 for i in f if labels[i] == "A")
            assert 3 <= a <= 4      # 17/5 spread

    def test_too_few_per_class(self):
        with pytest.raises(ValidationError, match="fewer than k"):
            stratified_folds(["A"] * 3 + ["C"] * 10, 5, seed=0)

    def test_single_class_rejected(self):
        with pytest.raises(ValidationError, match="two classes"):
            stratified_folds(["A"] * 10, 5, seed=0)


class TestKfoldClassify:
    def test_separable_blobs_high_f1(self):
        spec = ModelSpec(ModelKind.RANDOM_FOREST, RF_FAST, seed=0)
        rep = kfold_classify(blob_samples(0), spec, k=5, seed=0)
        assert rep.weighted_f1 >= 0.95
        assert set(rep.per_class_f1) == {"Abstract", "Concrete"}
        assert len(rep.fold_scores) == 5

    def test_deterministic_report(self):
        spec = ModelSpec(ModelKind.RANDOM_FOREST, RF_FAST, seed=9)
        a = kfold_classify(blob_samples(1), spec, k=5, seed=2)
        b = kfold_classify(blob_samples(1), spec, k=5, seed=2)
        assert a.to_dict() == b.to_dict()

    def test_weighted_f1_matches_confusion(self):
        from visdiv.learning import weighted_f1
        spec = ModelSpec(ModelKind.RANDOM_FOREST, RF_FAST, seed=0)
        rep = kfold_classify(blob_samples(2), spec, k=5, seed=1)
        assert rep.weighted_f1 == weighted_f1(rep.confusion)

    def test_logistic_regression_path(self):
        spec = ModelSpec(ModelKind.LOGISTIC_REGRESSION, {"max_iter": 200}, seed=0)
        rep = kfold_classify(blob_samples(3), spec, k=5, seed=0)
        assert rep.weighted_f1 >= 0.95

    def test_unknown_hyper_param_rejected(self):
        with pytest.raises(ValidationError, match="unknown hyper-parameters"):
            ModelSpec(ModelKind.RANDOM_FOREST, {"bogus": 1})


class TestGridSearch:
    def test_single_config_returned(self):
        spec, rep = grid_search(blob_samples(0, n=60), ModelKind.RANDOM_FOREST,
                                {"n_estimators": [10]}, k=5, seed=0)
        assert spec.hyper_params == {"n_estimators": 10}
        assert rep.best_params == {"n_estimators": 10}

    def test_depth_limited_loses_on_xor_like_data(self):
        # class = XOR of two features: a depth-1 stump cannot express it
        rng = np.random.default_rng(7)
        X = rng.normal(size=(160, 2))
        labels = ["C" if (x[0] > 0) != (x[1] > 0) else "A" for x in X]
        samples = [ConceptSample(f"s{i}", labels[i], None, X[i], ())
                   for i in range(160)]
        grid = {"max_depth": [1, 4], "n_estimators": [20]}
        spec, rep = grid_search(samples, ModelKind.RANDOM_FOREST, grid, k=5, seed=0)
        assert spec.hyper_params["max_depth"] == 4

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            grid_search(blob_samples(0, n=40), ModelKind.RANDOM_FOREST, {}, k=5, seed=0)

    def test_tie_keeps_first_config_in_grid_order(self):
        # both depths are deep enough to grow identical trees on this data
        samples = blob_samples(4, n=40)
        grid = {"max_depth": [None, 99], "n_estimators": [10]}
        spec, _ = grid_search(samples, ModelKind.RANDOM_FOREST, grid, k=5, seed=0)
        assert spec.hyper_params["max_depth"] is None


class TestMcRegress:
    def _monotone_samples(self, n=200):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(n, 8))
        y = 1.0 + 2.5 / (1.0 + np.exp(-X[:, 0]))
        return [ConceptSample(f"r{i}", None, float(y[i]), X[i], ()) for i in range(n)]

    def test_monotone_target_recovered(self):
        rep = mc_regress(self._monotone_samples(), splits=10, seed=0)
        assert rep.spearman_rho >= 0.9
        assert len(rep.split_scores) == 10

    def test_constant_target_flagged(self):
        rng = np.random.default_rng(0)
        samples = [ConceptSample(f"r{i}", None, 3.0, rng.normal(size=4), ())
                   for i in range(30)]
        rep = mc_regress(samples, splits=4, seed=0)
        assert rep.rmse == pytest.approx(0.0, abs=1e-9)
        assert rep.spearman_rho == 0.0
        assert len(rep.flags) == 4

    def test_too_few_samples(self):
        with pytest.raises(ValidationError, match="at least 10"):
            mc_regress(self._monotone_samples(5), splits=2, seed=0)

    def test_deterministic(self):
        samples = self._monotone_samples(40)
        a = mc_regress(samples, splits=5, seed=3)
        b = mc_regress(samples, splits=5, seed=3)
        assert a.to_dict() == b.to_dict()
