"""Acceptance suite: one test per release criterion, at the stated tolerances
and time budgets. The terminal summary prints one line per criterion.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from visdiv import pipeline
from visdiv.config import RunConfig
from visdiv.diversity import ConceptSample, eigenspectrum, similarity_matrix
from visdiv.embeddings import ingest_embeddings
from visdiv.features.basic import color_hsv, glcm_stats, hog, lbp_codes
from visdiv.features.objects import ingest_detections, load_hypernym_map
from visdiv.learning import (
    GradientBoostedTreesRegressor,
    ModelKind,
    ModelSpec,
    kfold_classify,
    krippendorff_alpha,
    mc_regress,
    rmse,
    spearman,
    weighted_f1,
    classwise_f1,
    confusion_matrix,
)
from visdiv.neighbors import neighbor_report
from visdiv.synthetic import generate_corpus
from visdiv.types import Attribute, BASIC_ATTRIBUTES


class Budget:
    def __init__(self, seconds: float):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            elapsed = time.perf_counter() - self.start
            assert elapsed < self.seconds, (
                f"suite took {elapsed:.1f}s, budget is {self.seconds:.0f}s")


def test_extractor_oracles():
    with Budget(10):
        # GLCM on [[0,0],[1,1]] at two levels, horizontal offset
        img = np.array([[0, 0], [255, 255]], np.uint8)
        contrast, _, energy, homogeneity = glcm_stats(img, levels=2).values[:4]
        assert contrast == 0.0
        assert energy == 0.5
        assert homogeneity == 1.0

        # LBP code of the reference 3x3 patch
        patch = np.array([[6, 5, 2], [7, 6, 1], [9, 8, 7]], np.uint8)
        assert lbp_codes(patch)[0, 0] == 241

        # constant image gives the all-zero HOG descriptor
        desc = hog(np.full((256, 256), 87, np.uint8))
        assert desc.dim == 34596
        assert np.abs(desc.values).max() == 0.0

        # two-color image: hue mass 0.5 at 0 and 120 degrees
        img = np.zeros((2, 2, 3), np.uint8)
        img[0, :, 0] = 255
        img[1, :, 1] = 255
        hist = color_hsv(img).values
        assert hist[0] == 0.5 and hist[10] == 0.5
        assert hist[:32].sum() == 1.0


def test_eigenspectrum_suite():
    with Budget(30):
        # identity / all-ones closed forms
        eye = eigenspectrum(similarity_matrix(list(np.eye(7)))).eigenvalues
        assert np.abs(eye - 1.0).max() < 1e-12
        ones = eigenspectrum(similarity_matrix([np.array([2.0, 1.0])] * 6)).eigenvalues
        assert abs(ones[0] - 6.0) < 1e-12 and np.abs(ones[1:]).max() < 1e-12

        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 51))

            # permutation invariance on a random symmetric matrix
            a = rng.normal(size=(n, n))
            sym = (a + a.T) / 2.0
            perm = rng.permutation(n)
            base = np.sort(np.linalg.eigvalsh(sym))
            permuted = np.sort(np.linalg.eigvalsh(sym[perm][:, perm]))
            assert np.abs(base - permuted).max() < 1e-9

            # PSD + trace checks on a cosine Gram matrix (some zero vectors)
            d = int(rng.integers(1, 12))
            vectors = rng.normal(size=(n, d))
            if n > 3:
                vectors[rng.integers(n)] = 0.0
            m = similarity_matrix(list(vectors))
            spectrum = eigenspectrum(m).eigenvalues
            assert spectrum.min() >= -1e-8
            assert abs(spectrum.sum() - np.trace(m.entries)) <= 1e-6 * n


def _oracle_topn(ids, vectors, q, topn):
    """Independent O(n^2) neighbor oracle: per-pair np.dot plus python sort."""
    sims = []
    vq = vectors[q]
    nq = float(np.sqrt(np.dot(vq, vq)))
    for j in range(len(ids)):
        if j == q:
            continue
        vj = vectors[j]
        nj = float(np.sqrt(np.dot(vj, vj)))
        sim = 0.0 if nq == 0.0 or nj == 0.0 else float(np.dot(vq, vj)) / (nq * nj)
        sims.append((ids[j], sim))
    sims.sort(key=lambda t: (-t[1], t[0]))
    return [i for i, _ in sims[:topn]]


def test_neighbor_oracle():
    with Budget(60):
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            n = (12, 40, 80, 150, 500)[seed % 5]
            d = int(rng.integers(3, 16))
            vectors = rng.normal(size=(n, d))
            # inject tie structure: duplicates, scaled copies (power-of-two
            # factor keeps the cosines exactly equal in floats), zero vectors
            vectors[1] = vectors[0]
            vectors[2] = vectors[0] * 2.0
            if n > 6:
                vectors[3] = 0.0
            ids = [f"img{i:03d}" for i in range(n)]
            lemmas = [f"c{i % 7}" for i in range(n)]
            topn = int(rng.integers(1, min(n - 1, 30) + 1))
            rep = neighbor_report(ids, lemmas, vectors, topn=topn)
            lemma_of = dict(zip(ids, lemmas))
            step = 1 if n <= 150 else 7
            for q in range(0, n, step):
                oracle = _oracle_topn(ids, vectors, q, topn)
                assert rep.per_image[ids[q]]["neighbors"] == oracle
                frac = 100.0 * sum(1 for i in oracle if lemma_of[i] == lemmas[q]) / topn
                assert rep.per_image[ids[q]]["same_concept_fraction"] == pytest.approx(frac)

        # the 40% fixture: 2 concepts x 3 identical images, topn = 5
        ids = [f"{c}{i}" for c in "xy" for i in range(3)]
        lemmas = ["x"] * 3 + ["y"] * 3
        rep = neighbor_report(ids, lemmas, np.ones((6, 4)), topn=5,
                              class_of={"x": "A", "y": "C"})
        assert rep.per_class == {"A": 40.0, "C": 40.0}


def _blobs(seed, n=200, d=10, sep=6.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    labels = []
    for i in range(n):
        if i % 2:
            X[i, 0] += sep
            labels.append("Concrete")
        else:
            labels.append("Abstract")
    return X, labels


def test_learning_suite():
    with Budget(180):
        spec = ModelSpec(ModelKind.RANDOM_FOREST, {"n_estimators": 25}, seed=1)

        # separable two-blob classification: weighted F1 >= 0.95 on every seed
        for seed in range(20):
            X, labels = _blobs(seed)
            samples = [ConceptSample(f"s{i}", labels[i], None, X[i], ())
                       for i in range(len(labels))]
            rep = kfold_classify(samples, spec, k=5, seed=seed)
            assert rep.weighted_f1 >= 0.95, f"seed {seed}: {rep.weighted_f1}"

        # permuted labels: chance level over 20 seeds
        permuted_scores = []
        for seed in range(20):
            X, labels = _blobs(seed)
            rng = np.random.default_rng(1000 + seed)
            shuffled = [labels[i] for i in rng.permutation(len(labels))]
            samples = [ConceptSample(f"s{i}", shuffled[i], None, X[i], ())
                       for i in range(len(labels))]
            permuted_scores.append(kfold_classify(samples, spec, k=5, seed=seed).weighted_f1)
        mean_permuted = float(np.mean(permuted_scores))
        assert 0.35 <= mean_permuted <= 0.65, f"permuted mean F1 {mean_permuted}"

        # monotone-target regression recovers the ordering
        rng = np.random.default_rng(77)
        X = rng.normal(size=(200, 8))
        y = 1.0 + 2.5 / (1.0 + np.exp(-X[:, 0]))
        samples = [ConceptSample(f"r{i}", None, float(y[i]), X[i], ()) for i in range(200)]
        reg = mc_regress(samples, splits=20, seed=5)
        assert reg.spearman_rho >= 0.9, f"mean rho {reg.spearman_rho}"

        # boosting training loss is non-increasing per round
        gbt = GradientBoostedTreesRegressor(n_estimators=80, seed=0).fit(X, y)
        losses = gbt.train_losses_
        assert all(losses[i] >= losses[i + 1] - 1e-12 for i in range(len(losses) - 1))

        # metric oracles, exact
        conf = confusion_matrix(["A", "A", "C", "C", "C"], ["A", "C", "C", "C", "C"])
        assert weighted_f1(conf) == pytest.approx(82.0 / 105.0, abs=1e-12)
        assert classwise_f1(conf)["A"] == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert spearman([1, 2, 3], [3, 1, 2]) == pytest.approx(-0.5, abs=1e-12)
        assert rmse([1.0, 2.0], [2.0, 4.0]) == pytest.approx(np.sqrt(2.5), abs=1e-12)
        assert krippendorff_alpha([["a", "a"], ["a", "a"]]) == 1.0
        assert krippendorff_alpha([["a", "a"], ["a", "b"]]) == pytest.approx(0.0, abs=1e-12)


def _synthetic_config(tmp_path: Path, concepts_per_class: int, images: int,
                      condition: int, seed: int, workers: int = 1,
                      out_name: str = "out") -> RunConfig:
    paths = generate_corpus(tmp_path / f"corpus{seed}", concepts_per_class=concepts_per_class,
                            images_per_concept=images, side=64, seed=seed)
    return RunConfig(
        manifest=paths["manifest"],
        norms=paths["norms"],
        detections=paths["detections"],
        hypernyms=paths["hypernyms"],
        condition=condition,
        min_side=64,
        canonical_side=64,
        attributes=[a.value for a in BASIC_ATTRIBUTES],
        codebook_k=64,
        codebook_max_descriptors=30000,
        classifier_params={"n_estimators": 50},
        mc_splits=5,
        seed=seed,
        out=str(tmp_path / out_name),
        workers=workers,
    )


def _run_pipeline(cfg: RunConfig, with_regress: bool = False):
    pipeline.ingest_run(cfg)
    pipeline.codebook_run(cfg)
    pipeline.extract_run(cfg)
    pipeline.diversity_run(cfg)
    classify = pipeline.classify_run(cfg)
    neighbors = pipeline.neighbors_run(cfg)
    if with_regress:
        pipeline.regress_run(cfg)
    pipeline.stats_run(cfg)
    pipeline.report_run(cfg)
    return classify, neighbors


def test_end_to_end_synthetic_diversity(tmp_path):
    with Budget(600):
        cfg = _synthetic_config(tmp_path, concepts_per_class=10, images=25,
                                condition=25, seed=42)
        classify, neighbors = _run_pipeline(cfg)

        combined = classify["feature_sets"]["CombinedBasic"]
        assert combined["weighted_f1"] >= 0.9, combined

        # low-variance (concrete-like) concepts keep more of their neighbors
        fractions = {cls: [] for cls in ("Abstract", "Concrete")}
        for attr, entry in neighbors["attributes"].items():
            for cls in fractions:
                fractions[cls].append(entry["per_class"][cls])
        mean_abstract = float(np.mean(fractions["Abstract"]))
        mean_concrete = float(np.mean(fractions["Concrete"]))
        assert mean_concrete > mean_abstract, (mean_abstract, mean_concrete)


def _tree_digest(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_determinism_across_worker_counts(tmp_path):
    cfg1 = _synthetic_config(tmp_path, concepts_per_class=6, images=10,
                             condition=10, seed=3, workers=1, out_name="out_w1")
    cfg2 = _synthetic_config(tmp_path, concepts_per_class=6, images=10,
                             condition=10, seed=3, workers=2, out_name="out_w2")
    _run_pipeline(cfg1, with_regress=True)
    _run_pipeline(cfg2, with_regress=True)
    tree1 = _tree_digest(cfg1.run_dir())
    tree2 = _tree_digest(cfg2.run_dir())
    assert sorted(tree1) == sorted(tree2)
    different = [name for name in tree1 if tree1[name] != tree2[name]]
    assert not different, f"files differ across worker counts: {different}"


def test_fixture_files_support_primary_suite(fixtures_dir):
    """The committed fixture files stand in for the secondary component."""
    vit = ingest_embeddings(fixtures_dir / "vit_embeddings.vdem", expected_dim=768)
    simclr = ingest_embeddings(fixtures_dir / "simclr_embeddings.jsonl")
    assert len(vit) == 10 and len(simclr) == 10
    assert all(fv.attribute is Attribute.VIT for fv in vit.values())

    index = ingest_detections(fixtures_dir / "detections.jsonl")
    assert index.rejected == 0
    hmap = load_hypernym_map(fixtures_dir / "hypernyms.csv")
    assert all(d.class_name in hmap.entries
               for dets in index.per_image.values() for d in dets)

    # embeddings feed the diversity kernel directly
    vectors = [vit[f"img{i:03d}"] for i in range(10)]
    spectrum = eigenspectrum(similarity_matrix(vectors, "fixture", Attribute.VIT))
    assert abs(spectrum.eigenvalues.sum() - 10.0) < 1e-6 * 10
