import json

import numpy as np
import pytest
from click.testing import CliRunner

from deep_extract.cli import main
from deep_extract.detector import BlobDetector, build_detector
from deep_extract.runner import export_detections, export_embeddings, model_kind

# the consumer side of the contract: the analysis toolkit's ingestion API
from visdiv.embeddings import ingest_embeddings
from visdiv.features.objects import ingest_detections
from visdiv.types import Attribute


class TestEmbeddingsExport:
    def test_vit_tiny_roundtrip(self, corpus, tmp_path):
        out = tmp_path / "vit.vdem"
        summary = export_embeddings(corpus["manifest"], out, "vit-tiny", seed=1)
        assert summary["rows"] == 10 and summary["rejected"] == 0
        loaded = ingest_embeddings(out)
        assert len(loaded) == 10
        assert all(fv.attribute is Attribute.VIT for fv in loaded.values())
        assert all(fv.dim == 64 for fv in loaded.values())
        # cosine of any exported row with itself is 1.0 after load
        vec = loaded["img003"].values
        cos = float(vec @ vec / (np.linalg.norm(vec) ** 2))
        assert cos == pytest.approx(1.0, abs=1e-9)

    def test_simclr_r18_jsonl_roundtrip(self, corpus, tmp_path):
        out = tmp_path / "simclr.jsonl"
        summary = export_embeddings(corpus["manifest"], out, "simclr-r18", seed=2,
                                    file_format="jsonl")
        assert summary["rows"] == 10
        loaded = ingest_embeddings(out, expected_dim=512)
        assert len(loaded) == 10
        assert all(fv.attribute is Attribute.SIMCLR for fv in loaded.values())

    def test_identical_inputs_identical_rows(self, corpus, tmp_path):
        # img008 and img009 reference the same file
        out = tmp_path / "vit.vdem"
        export_embeddings(corpus["manifest"], out, "vit-tiny", seed=1)
        loaded = ingest_embeddings(out)
        assert np.array_equal(loaded["img008"].values, loaded["img009"].values)

    def test_deterministic_export_bytes(self, corpus, tmp_path):
        a, b = tmp_path / "a.vdem", tmp_path / "b.vdem"
        export_embeddings(corpus["manifest"], a, "vit-tiny", seed=7)
        export_embeddings(corpus["manifest"], b, "vit-tiny", seed=7)
        assert a.read_bytes() == b.read_bytes()

    def test_unreadable_image_listed_in_rejects(self, corpus, tmp_path):
        manifest = tmp_path / "manifest.jsonl"
        rows = corpus["manifest"].read_text().splitlines()
        broken = tmp_path / "broken.png"
        broken.write_bytes(b"not an image")
        rows.append(json.dumps({"image_id": "bad", "lemma": "c0", "dataset_tag": "Other",
                                "path": str(broken), "width": 64, "height": 64}))
        manifest.write_text("\n".join(rows) + "\n")
        out = tmp_path / "vit.vdem"
        summary = export_embeddings(manifest, out, "vit-tiny", seed=1)
        assert summary["rows"] == 10 and summary["rejected"] == 1
        rejects = [json.loads(l) for l in
                   (tmp_path / "vit.vdem.rejects.jsonl").read_text().splitlines()]
        assert rejects[0]["image_id"] == "bad"
        assert len(ingest_embeddings(out)) == 10

    def test_vit_b16_real_architecture(self, corpus, tmp_path):
        manifest = tmp_path / "two.jsonl"
        manifest.write_text("\n".join(corpus["manifest"].read_text().splitlines()[:2]) + "\n")
        out = tmp_path / "vitb.vdem"
        summary = export_embeddings(manifest, out, "vit-b16", seed=0)
        assert summary["dim"] == 768
        loaded = ingest_embeddings(out, expected_dim=768)
        assert len(loaded) == 2


class TestDetectionsExport:
    def test_blob_roundtrip_zero_rejects(self, corpus, tmp_path):
        out = tmp_path / "dets.jsonl"
        summary = export_detections(corpus["manifest"], out, "blob")
        assert summary["detections"] > 0
        index = ingest_detections(out)
        assert index.rejected == 0
        for dets in index.per_image.values():
            for d in dets:
                x0, y0, x1, y1 = d.bbox
                assert 0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0
                assert 0.0 <= d.confidence <= 1.0

    def test_blank_image_has_no_rows(self, corpus, tmp_path):
        out = tmp_path / "dets.jsonl"
        export_detections(corpus["manifest"], out, "blob")
        index = ingest_detections(out)
        assert index.for_image("img000") == []      # img0 is constant

    def test_blob_detector_finds_planted_blob(self):
        img = np.full((64, 64, 3), 50, np.uint8)
        img[20:30, 36:50] = 220
        dets = BlobDetector().detect(img)
        assert len(dets) == 1
        x0, y0, x1, y1 = dets[0].bbox
        assert x0 == pytest.approx(36 / 64) and y0 == pytest.approx(20 / 64)
        assert x1 == pytest.approx(50 / 64) and y1 == pytest.approx(30 / 64)

    def test_conf_min_filters(self, corpus, tmp_path):
        out_all = tmp_path / "all.jsonl"
        out_strict = tmp_path / "strict.jsonl"
        export_detections(corpus["manifest"], out_all, "blob", conf_min=0.0)
        export_detections(corpus["manifest"], out_strict, "blob", conf_min=0.9)
        assert len(out_strict.read_text().splitlines()) <= len(out_all.read_text().splitlines())

    def test_fasterrcnn_schema_valid(self, corpus, tmp_path):
        manifest = tmp_path / "one.jsonl"
        manifest.write_text(corpus["manifest"].read_text().splitlines()[1] + "\n")
        out = tmp_path / "frcnn.jsonl"
        summary = export_detections(manifest, out, "fasterrcnn-r50", seed=0)
        assert summary["rejected"] == 0
        index = ingest_detections(out)       # random weights, but schema must hold
        assert index.rejected == 0


class TestCli:
    def test_embeddings_command(self, corpus, tmp_path):
        out = tmp_path / "cli.vdem"
        result = CliRunner().invoke(main, ["--model", "vit-tiny",
                                           "--manifest", str(corpus["manifest"]),
                                           "--out", str(out), "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert "rows: 10" in result.output
        assert len(ingest_embeddings(out)) == 10

    def test_detections_command(self, corpus, tmp_path):
        out = tmp_path / "cli_dets.jsonl"
        result = CliRunner().invoke(main, ["--model", "blob",
                                           "--manifest", str(corpus["manifest"]),
                                           "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert ingest_detections(out).rejected == 0

    def test_unknown_model_exit_code(self, corpus, tmp_path):
        result = CliRunner().invoke(main, ["--model", "nope",
                                           "--manifest", str(corpus["manifest"]),
                                           "--out", str(tmp_path / "x")])
        assert result.exit_code == 1
        assert "unknown model" in result.output


def test_model_kind_dispatch():
    assert model_kind("vit-b16") == "embeddings"
    assert model_kind("simclr-r50") == "embeddings"
    assert model_kind("blob") == "detections"
    with pytest.raises(ValueError):
        model_kind("yolo9000")


def test_detector_registry():
    assert isinstance(build_detector("blob"), BlobDetector)
