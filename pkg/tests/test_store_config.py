import json

import numpy as np
import pytest

from visdiv.config import RunConfig, load_config
from visdiv.diversity import EigenSpectrum
from visdiv.errors import ParseError, ValidationError
from visdiv.store import (
    read_feature_ids,
    read_features,
    read_spectra,
    write_csv,
    write_features,
    write_report,
    write_spectra,
)
from visdiv.types import Attribute, FeatureVector


class TestFeatureStore:
    def _vectors(self, n=3, dim=5):
        rng = np.random.default_rng(0)
        return [FeatureVector(f"i{k}", Attribute.COLOR, np.abs(rng.normal(size=dim)))
                for k in range(n)]

    def test_roundtrip(self, tmp_path):
        path = tmp_path / "Color.jsonl"
        vecs = self._vectors()
        write_features(path, vecs)
        loaded = read_features(path)
        assert set(loaded) == {"i0", "i1", "i2"}
        for fv in vecs:
            assert np.array_equal(loaded[fv.image_id].values, fv.values)

    def test_append_and_id_scan(self, tmp_path):
        path = tmp_path / "Color.jsonl"
        vecs = self._vectors(4)
        write_features(path, vecs[:2])
        assert read_feature_ids(path) == {"i0", "i1"}
        write_features(path, vecs[2:], append=True)
        assert read_feature_ids(path) == {"i0", "i1", "i2", "i3"}

    def test_dim_disagreement_rejected(self, tmp_path):
        path = tmp_path / "Color.jsonl"
        rows = [
            {"image_id": "a", "attribute": "Color", "dim": 2, "values": [0.5, 0.5]},
            {"image_id": "b", "attribute": "Color", "dim": 3, "values": [0.2, 0.3, 0.5]},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(ParseError, match="differs"):
            read_features(path)

    def test_flags_preserved(self, tmp_path):
        path = tmp_path / "Texture.jsonl"
        fv = FeatureVector("x", Attribute.TEXTURE, np.zeros(4), flags=("glcm_zero_variance",))
        write_features(path, [fv])
        assert read_features(path)["x"].flags == ("glcm_zero_variance",)


class TestSpectraStore:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "Color.jsonl"
        spectra = [EigenSpectrum("banana", Attribute.COLOR, np.array([3.0, 0.5, 0.0])),
                   EigenSpectrum("idea", Attribute.COLOR, np.array([1.0, 1.0, 1.0]))]
        write_spectra(path, spectra)
        loaded = read_spectra(path)
        assert set(loaded) == {"banana", "idea"}
        assert np.array_equal(loaded["banana"].eigenvalues, spectra[0].eigenvalues)


class TestReports:
    def test_deterministic_bytes(self, tmp_path):
        payload = {"b": [1.5, 2.25], "a": {"z": 1, "m": 0.1}}
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        write_report(p1, payload)
        write_report(p2, json.loads(json.dumps(payload)))
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_layout(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["attribute", "Abstract", "Concrete"], [["Color", 1, 2]])
        assert path.read_text() == "attribute,Abstract,Concrete\nColor,1,2\n"


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.condition == 25 and cfg.canonical_side == 256
        assert cfg.abstract_band == (1.07, 1.96)

    def test_hash_ignores_out_and_workers(self):
        a = RunConfig(out="x", workers=1)
        b = RunConfig(out="y", workers=8)
        assert a.config_hash() == b.config_hash()

    def test_hash_ignores_study_selectors(self):
        # attribute subsets and the condition select files within the run dir
        assert RunConfig(attributes=["Color"]).config_hash() == RunConfig().config_hash()
        assert RunConfig(condition=25).config_hash() == RunConfig(condition=100).config_hash()

    def test_hash_sensitive_to_artifact_semantics(self):
        assert RunConfig(seed=0).config_hash() != RunConfig(seed=1).config_hash()
        assert RunConfig(canonical_side=256).config_hash() != RunConfig(canonical_side=64).config_hash()
        assert RunConfig(conf_min=0.5).config_hash() != RunConfig(conf_min=0.6).config_hash()

    def test_unknown_attribute_rejected(self):
        with pytest.raises(ValidationError, match="unknown attribute"):
            RunConfig(attributes=["Colour"])

    def test_toml_load_and_flag_override(self, tmp_path):
        (tmp_path / "norms.csv").write_text("word,concreteness\n")
        (tmp_path / "m.jsonl").write_text("")
        config = tmp_path / "c.toml"
        config.write_text(
            "[corpus]\n"
            'manifest = "m.jsonl"\n'
            'norms = "norms.csv"\n'
            "condition = 10\n"
            "[codebook]\n"
            "k = 64\n"
            "[run]\n"
            "seed = 3\n"
        )
        cfg = load_config(config, {"seed": 11, "attributes": ["Color"]})
        assert cfg.condition == 10
        assert cfg.codebook_k == 64
        assert cfg.seed == 11                       # flag wins
        assert cfg.attributes == ["Color"]
        assert cfg.manifest.endswith("m.jsonl")     # resolved relative to the config

    def test_unknown_key_rejected(self, tmp_path):
        config = tmp_path / "c.toml"
        config.write_text("[corpus]\nbogus = 1\n")
        with pytest.raises(ValidationError, match="unknown key"):
            load_config(config)

    def test_missing_required_path(self):
        cfg = RunConfig(manifest="/does/not/exist.jsonl")
        with pytest.raises(ValidationError, match="does not exist"):
            cfg.require_paths("manifest")
        with pytest.raises(ValidationError, match="required"):
            RunConfig().require_paths("detections")
