"""The core representation: per-concept pairwise cosine similarity matrices per
attribute, reduced to order-invariant eigenvalue spectra, concatenated across
attributes into one sample per concept.

A set of N identical images gives the spectrum (N, 0, ..., 0); N mutually
orthogonal images give (1, ..., 1). Those extremes bound the diversity signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .types import Attribute

SYMMETRY_TOL = 1e-12


@dataclass
class SimilarityMatrix:
    lemma: str
    attribute: Attribute
    n: int
    entries: np.ndarray
    zero_rows: tuple[int, ...] = ()   # images whose feature vector was all-zero


@dataclass
class EigenSpectrum:
    lemma: str
    attribute: Attribute
    eigenvalues: np.ndarray            # sorted descending


@dataclass
class ConceptSample:
    lemma: str
    class_label: str | None
    rating: float | None
    vector: np.ndarray
    attribute_manifest: tuple[tuple[str, int], ...]


def similarity_matrix(features, lemma: str = "", attribute: Attribute | None = None) -> SimilarityMatrix:
    """Pairwise cosine similarities of one concept's feature vectors.

    All-zero vectors get similarity 0 to everything, including themselves on
    the diagonal; their row indices are flagged. The result is exactly
    symmetric (computed once, mirrored) with entries clipped to [-1, 1].
    """
    vectors = [np.asarray(f.values if hasattr(f, "values") else f, dtype=np.float64)
               for f in features]
    if len(vectors) < 2:
        raise ValidationError(f"need at least 2 images per concept, got {len(vectors)}")
    dims = {v.shape for v in vectors}
    if len(dims) != 1 or vectors[0].ndim != 1:
        raise ValidationError(f"feature vectors disagree in shape: {sorted(dims)}")
    if attribute is None:
        attribute = getattr(features[0], "attribute", Attribute.COLOR)

    mat = np.stack(vectors)
    norms = np.linalg.norm(mat, axis=1)
    zero = norms == 0.0
    unit = mat / np.where(zero, 1.0, norms)[:, None]
    unit[zero] = 0.0
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    sim = np.triu(sim) + np.triu(sim, 1).T
    np.fill_diagonal(sim, np.where(zero, 0.0, 1.0))
    return SimilarityMatrix(lemma=lemma, attribute=attribute, n=len(vectors),
                            entries=sim, zero_rows=tuple(int(i) for i in np.nonzero(zero)[0]))


def eigenspectrum(m: SimilarityMatrix) -> EigenSpectrum:
    """Real eigenvalues of a symmetric similarity matrix, sorted descending."""
    a = np.asarray(m.entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"similarity matrix must be square, got {a.shape}")
    asym = float(np.abs(a - a.T).max()) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValidationError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    eigenvalues = np.linalg.eigvalsh(a)[::-1].copy()
    return EigenSpectrum(lemma=m.lemma, attribute=m.attribute, eigenvalues=eigenvalues)


def combine(spectra: dict[Attribute, EigenSpectrum], order, lemma: str | None = None,
            class_label: str | None = None, rating: float | None = None) -> ConceptSample:
    """Concatenate per-attribute spectra in the given fixed order."""
    order = list(order)
    missing = [a.value for a in order if a not in spectra]
    if missing:
        raise ValidationError(f"missing spectra for attributes: {', '.join(missing)}")
    lengths = {a: len(spectra[a].eigenvalues) for a in order}
    if len(set(lengths.values())) > 1:
        raise ValidationError(f"spectra disagree in N: { {k.value: v for k, v in lengths.items()} }")
    if lemma is None:
        lemma = spectra[order[0]].lemma
    vector = np.concatenate([spectra[a].eigenvalues for a in order])
    manifest = tuple((a.value, lengths[a]) for a in order)
    return ConceptSample(lemma=lemma, class_label=class_label, rating=rating,
                         vector=vector, attribute_manifest=manifest)
