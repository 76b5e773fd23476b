import math

import numpy as np
import pytest

from visdiv.errors import ValidationError
from visdiv.neighbors import (
    mean_neighbor_similarity,
    nearest_neighbors,
    neighbor_report,
    same_concept_fraction,
)


def brute_force_topn(ids, vectors, q, topn):
    """Independent O(n^2) oracle: plain-python cosine, sort by (-sim, id)."""
    out = []
    vq = vectors[q]
    nq = math.sqrt(sum(float(v) * float(v) for v in vq))
    for j in range(len(ids)):
        if j == q:
            continue
        vj = vectors[j]
        nj = math.sqrt(sum(float(v) * float(v) for v in vj))
        dot = sum(float(a) * float(b) for a, b in zip(vq, vj))
        sim = 0.0 if nq == 0 or nj == 0 else dot / (nq * nj)
        out.append((ids[j], sim))
    out.sort(key=lambda t: (-t[1], t[0]))
    return [i for i, _ in out[:topn]]


class TestNearestNeighbors:
    def test_identical_beats_orthogonal(self):
        ids = ["a", "b", "c"]
        vecs = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert nearest_neighbors(ids, vecs, "a", 1) == [("b", 1.0)]

    def test_topn_equals_all_others(self):
        ids = [f"i{k}" for k in range(6)]
        vecs = np.random.default_rng(0).normal(size=(6, 4))
        got = nearest_neighbors(ids, vecs, "i2", 5)
        assert len(got) == 5 and "i2" not in [i for i, _ in got]

    def test_query_missing(self):
        with pytest.raises(ValidationError, match="not present"):
            nearest_neighbors(["a", "b"], np.eye(2), "zz", 1)

    def test_zero_query_vector_defined(self):
        ids = ["a", "b", "c"]
        vecs = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        got = nearest_neighbors(ids, vecs, "a", 2)
        assert [i for i, _ in got] == ["b", "c"]       # similarity 0, id tie-break
        assert all(s == 0.0 for _, s in got)

    def test_tie_break_lexicographic(self):
        ids = ["z", "m", "a", "b"]
        vecs = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [1.5, 0.0]])
        got = nearest_neighbors(ids, vecs, "z", 3)
        assert [i for i, _ in got] == ["a", "b", "m"]

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(5)
        n = 60
        ids = [f"img{i:03d}" for i in range(n)]
        vecs = rng.normal(size=(n, 12))
        for q in range(0, n, 7):
            got = [i for i, _ in nearest_neighbors(ids, vecs, ids[q], 15)]
            assert got == brute_force_topn(ids, vecs, q, 15)

    def test_scale_invariant_ranking(self):
        rng = np.random.default_rng(6)
        ids = [f"i{k}" for k in range(20)]
        vecs = rng.normal(size=(20, 5))
        base = [i for i, _ in nearest_neighbors(ids, vecs, "i3", 10)]
        scaled = [i for i, _ in nearest_neighbors(ids, vecs * 37.5, "i3", 10)]
        assert base == scaled


class TestNeighborReport:
    def test_within_concept_identical_cross_orthogonal(self):
        ids = [f"{c}{i}" for c in "xy" for i in range(3)]
        lemmas = ["x"] * 3 + ["y"] * 3
        vecs = np.zeros((6, 2))
        vecs[:3, 0] = 1.0
        vecs[3:, 1] = 1.0
        rep = neighbor_report(ids, lemmas, vecs, topn=2, class_of={"x": "A", "y": "C"})
        assert rep.per_concept == {"x": 100.0, "y": 100.0}
        assert rep.per_class == {"A": 100.0, "C": 100.0}

    def test_all_identical_forty_percent(self):
        ids = [f"{c}{i}" for c in "xy" for i in range(3)]
        lemmas = ["x"] * 3 + ["y"] * 3
        vecs = np.ones((6, 4))
        rep = neighbor_report(ids, lemmas, vecs, topn=5, class_of={"x": "A", "y": "C"})
        assert rep.per_class == {"A": 40.0, "C": 40.0}

    def test_counts_sum_to_topn(self):
        rng = np.random.default_rng(2)
        n = 30
        ids = [f"i{k:02d}" for k in range(n)]
        lemmas = [f"c{k % 5}" for k in range(n)]
        vecs = rng.normal(size=(n, 6))
        topn = 7
        rep = neighbor_report(ids, lemmas, vecs, topn=topn)
        for image_id, row in rep.per_image.items():
            same = row["same_concept_fraction"] * topn / 100.0
            assert same == pytest.approx(round(same))
            assert len(row["neighbors"]) == topn
            assert image_id not in row["neighbors"]
            sims = row["similarities"]
            assert sims == sorted(sims, reverse=True)

    def test_same_concept_fraction_recomputes_report_levels(self):
        rng = np.random.default_rng(8)
        n = 24
        ids = [f"i{k:02d}" for k in range(n)]
        lemmas = [f"c{k % 3}" for k in range(n)]
        class_of = {"c0": "A", "c1": "C", "c2": "C"}
        rep = neighbor_report(ids, lemmas, rng.normal(size=(n, 5)), topn=6,
                              class_of=class_of)
        per_concept, per_class = same_concept_fraction(
            rep.per_image, dict(zip(ids, lemmas)), class_of)
        assert per_concept == rep.per_concept
        assert per_class == rep.per_class

    def test_fraction_matches_exhaustive_count(self):
        rng = np.random.default_rng(3)
        n = 40
        ids = [f"i{k:02d}" for k in range(n)]
        lemmas = [f"c{k % 4}" for k in range(n)]
        vecs = rng.normal(size=(n, 8))
        topn = 9
        rep = neighbor_report(ids, lemmas, vecs, topn=topn)
        lemma_of = dict(zip(ids, lemmas))
        for q in range(n):
            oracle_ids = brute_force_topn(ids, vecs, q, topn)
            frac = 100.0 * sum(1 for i in oracle_ids if lemma_of[i] == lemmas[q]) / topn
            assert rep.per_image[ids[q]]["same_concept_fraction"] == pytest.approx(frac)


class TestMeanNeighborSimilarity:
    def test_all_identical_is_one(self):
        ids = ["a", "b", "c", "d"]
        lemmas = ["p", "p", "q", "q"]
        vecs = np.ones((4, 3))
        out = mean_neighbor_similarity(ids, lemmas, vecs, {"p": "A", "q": "C"})
        assert out == {"A": pytest.approx(1.0), "C": pytest.approx(1.0)}

    def test_mutually_orthogonal_is_zero(self):
        ids = ["a", "b", "c", "d"]
        lemmas = ["p", "p", "q", "q"]
        out = mean_neighbor_similarity(ids, lemmas, np.eye(4), {"p": "A", "q": "C"}, topn=3)
        assert out == {"A": pytest.approx(0.0), "C": pytest.approx(0.0)}


class TestDegenerateCorpus:
    def test_all_zero_vectors_rank_by_id(self):
        # e.g. object counts when nothing was detected anywhere
        ids = ["d", "c", "b", "a"]
        lemmas = ["p", "p", "q", "q"]
        rep = neighbor_report(ids, lemmas, np.zeros((4, 6)), topn=2,
                              class_of={"p": "A", "q": "C"})
        assert set(rep.zero_vector_ids) == {"a", "b", "c", "d"}
        assert rep.per_image["d"]["neighbors"] == ["a", "b"]
        assert rep.per_image["d"]["similarities"] == [0.0, 0.0]
        # p-queries pick [a, b] (both q); q-queries pick one q each
        assert rep.per_class["A"] == pytest.approx(0.0)
        assert rep.per_class["C"] == pytest.approx(50.0)
