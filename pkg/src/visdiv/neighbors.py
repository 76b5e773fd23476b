"""Cross-concept cosine nearest-neighbor analysis: exact top-n search, the
same-concept fraction, and mean top-25 similarity tables.

Search is exact (no approximate index); the query image is excluded from its
own neighbor list, and similarity ties rank the lexicographically smaller
image_id first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

MEAN_SIMILARITY_TOPN = 25


@dataclass
class NeighborReport:
    topn: int
    per_image: dict[str, dict] = field(default_factory=dict)
    per_concept: dict[str, float] = field(default_factory=dict)
    per_class: dict[str, float] = field(default_factory=dict)
    mean_topk_similarity: dict[str, float] = field(default_factory=dict)
    zero_vector_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "topn": self.topn,
            "per_image": self.per_image,
            "per_concept": self.per_concept,
            "per_class": self.per_class,
            "mean_topk_similarity": self.mean_topk_similarity,
            "zero_vector_ids": list(self.zero_vector_ids),
        }


def _unit_rows(matrix: np.ndarray):
    norms = np.linalg.norm(matrix, axis=1)
    zero = norms == 0.0
    unit = matrix / np.where(zero, 1.0, norms)[:, None]
    unit[zero] = 0.0
    return unit, zero


def _ranked_neighbors(ids: np.ndarray, sims: np.ndarray, exclude: int, topn: int):
    """Indices of the topn neighbors by (similarity desc, image_id asc)."""
    mask = np.ones(len(ids), dtype=bool)
    mask[exclude] = False
    cand = np.nonzero(mask)[0]
    order = np.lexsort((ids[cand], -sims[cand]))
    return cand[order[:topn]]


def nearest_neighbors(ids, vectors, query_id: str, topn: int):
    """Exact top-n cosine neighbors of one image. Returns [(image_id, sim)].

    A zero query vector is defined as similarity 0 to everything (the ranking
    then falls back to the id tie-break).
    """
    ids = np.asarray(list(ids))
    matrix = np.asarray(vectors, dtype=np.float64)
    if len(ids) != matrix.shape[0]:
        raise ValidationError(f"{len(ids)} ids vs {matrix.shape[0]} vectors")
    where = np.nonzero(ids == query_id)[0]
    if len(where) == 0:
        raise ValidationError(f"query {query_id!r} not present")
    if topn < 1 or topn > len(ids) - 1:
        raise ValidationError(f"topn must be in [1, {len(ids) - 1}], got {topn}")
    q = int(where[0])
    unit, _ = _unit_rows(matrix)
    sims = unit @ unit[q]
    picked = _ranked_neighbors(ids, sims, q, topn)
    return [(str(ids[i]), float(sims[i])) for i in picked]


def neighbor_report(ids, lemmas, vectors, topn: int,
                    class_of: dict[str, str] | None = None) -> NeighborReport:
    """Full Study-2 report for one attribute.

    Image level: share of the top-n neighbors with the query's lemma, as a
    percentage, plus the mean similarity of the top-25. Concept level: mean
    over its images. Class level: mean over concepts (requires ``class_of``
    mapping lemma -> class name).
    """
    ids = np.asarray(list(ids))
    lemmas = np.asarray(list(lemmas))
    matrix = np.asarray(vectors, dtype=np.float64)
    n = len(ids)
    if n != len(lemmas) or n != matrix.shape[0]:
        raise ValidationError("ids, lemmas, and vectors must align")
    if topn < 1 or topn > n - 1:
        raise ValidationError(f"topn must be in [1, {n - 1}], got {topn}")

    unit, zero = _unit_rows(matrix)
    sim_all = unit @ unit.T
    k_sim = min(MEAN_SIMILARITY_TOPN, n - 1)

    report = NeighborReport(topn=topn, zero_vector_ids=tuple(str(i) for i in ids[zero]))
    concept_mean_sim: dict[str, list[float]] = {}
    for q in range(n):
        picked = _ranked_neighbors(ids, sim_all[q], q, topn)
        same = int((lemmas[picked] == lemmas[q]).sum())
        top_sims = sim_all[q][picked]
        report.per_image[str(ids[q])] = {
            "neighbors": [str(i) for i in ids[picked]],
            "similarities": [float(s) for s in top_sims],
            "same_concept_fraction": 100.0 * same / topn,
        }
        concept_mean_sim.setdefault(str(lemmas[q]), []).append(float(np.mean(top_sims[:k_sim])))

    lemma_of = {str(i): str(l) for i, l in zip(ids, lemmas)}
    report.per_concept, report.per_class = same_concept_fraction(
        report.per_image, lemma_of, class_of)
    if class_of:
        by_class_sim: dict[str, list[float]] = {}
        for lemma, sims in concept_mean_sim.items():
            cls = class_of.get(lemma)
            if cls is not None:
                by_class_sim.setdefault(cls, []).append(float(np.mean(sims)))
        report.mean_topk_similarity = {c: float(np.mean(v)) for c, v in sorted(by_class_sim.items())}
    return report


def same_concept_fraction(per_image_rows: dict[str, dict], lemma_of: dict[str, str],
                          class_of: dict[str, str] | None = None):
    """Aggregate per-image same-concept fractions to concept and class level.

    Works on a NeighborReport's ``per_image`` rows (also after JSON round-trip):
    concept level is the mean over its images, class level the mean over
    concepts. Returns (per_concept, per_class).
    """
    by_concept: dict[str, list[float]] = {}
    for image_id, row in per_image_rows.items():
        if image_id not in lemma_of:
            raise ValidationError(f"image {image_id!r} has no concept lemma")
        by_concept.setdefault(lemma_of[image_id], []).append(row["same_concept_fraction"])
    per_concept = {c: float(np.mean(v)) for c, v in sorted(by_concept.items())}
    per_class: dict[str, float] = {}
    if class_of:
        by_class: dict[str, list[float]] = {}
        for lemma, frac in per_concept.items():
            cls = class_of.get(lemma)
            if cls is not None:
                by_class.setdefault(cls, []).append(frac)
        per_class = {c: float(np.mean(v)) for c, v in sorted(by_class.items())}
    return per_concept, per_class


def mean_neighbor_similarity(ids, lemmas, vectors, class_of: dict[str, str],
                             topn: int = MEAN_SIMILARITY_TOPN) -> dict[str, float]:
    """Mean cosine of each image's top-``topn`` neighbors, aggregated image ->
    concept -> class."""
    ids = np.asarray(list(ids))
    lemmas = np.asarray(list(lemmas))
    matrix = np.asarray(vectors, dtype=np.float64)
    n = len(ids)
    k = min(topn, n - 1)
    if k < 1:
        raise ValidationError("need at least two images")
    unit, _ = _unit_rows(matrix)
    sim_all = unit @ unit.T
    per_concept: dict[str, list[float]] = {}
    for q in range(n):
        picked = _ranked_neighbors(ids, sim_all[q], q, k)
        per_concept.setdefault(str(lemmas[q]), []).append(float(np.mean(sim_all[q][picked])))
    by_class: dict[str, list[float]] = {}
    for lemma, sims in per_concept.items():
        cls = class_of.get(lemma)
        if cls is None:
            continue
        by_class.setdefault(cls, []).append(float(np.mean(sims)))
    return {c: float(np.mean(v)) for c, v in sorted(by_class.items())}
