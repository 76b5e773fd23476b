"""Feed exported embeddings through the analysis pipeline's public surface:
manifest -> deep-extract -> extract/diversity on the ViT attribute."""

import pytest

from deep_extract.runner import export_embeddings

from visdiv import pipeline
from visdiv.config import RunConfig
from visdiv.store import read_spectra
from visdiv.synthetic import generate_corpus
from visdiv.types import Attribute


@pytest.fixture(scope="module")
def analysis_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("integration")
    return root, generate_corpus(root / "corpus", concepts_per_class=4,
                                 images_per_concept=6, side=64, seed=5)


def test_exported_embeddings_drive_diversity(analysis_corpus):
    root, paths = analysis_corpus
    vit_path = root / "vit.vdem"
    summary = export_embeddings(paths["manifest"], vit_path, "vit-tiny", seed=0)
    assert summary["rejected"] == 0

    cfg = RunConfig(
        manifest=paths["manifest"],
        norms=paths["norms"],
        vit_embeddings=str(vit_path),
        attributes=["ViT"],
        condition=6,
        min_side=64,
        canonical_side=64,
        out=str(root / "out"),
    )
    pipeline.ingest_run(cfg)
    extract = pipeline.extract_run(cfg)
    assert extract["attributes"]["ViT"]["new_rows"] > 0
    assert extract["attributes"]["ViT"]["missing_embeddings"] <= 2   # the excluded concept
    diversity = pipeline.diversity_run(cfg)
    assert diversity["attributes"]["ViT"]["concepts"] == 8
    spectra = read_spectra(pipeline.spectra_path(cfg, Attribute.VIT))
    for spectrum in spectra.values():
        assert len(spectrum.eigenvalues) == 6
        assert abs(spectrum.eigenvalues.sum() - 6.0) < 1e-6 * 6
