"""Run configuration: a single TOML file plus flag overrides (flags win).

Every run writes under a config-hash-named directory (no timestamps), so
identical configurations land in identical locations and reports are
reproducible byte for byte. The hash covers the semantic configuration only;
``out`` and ``workers`` never influence results and are excluded.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .types import Attribute, BASIC_ATTRIBUTES

DEFAULT_ATTRIBUTES = [a.value for a in BASIC_ATTRIBUTES]


@dataclass
class RunConfig:
    # corpus
    manifest: str = ""
    norms: str = ""
    abstract_band: tuple[float, float] = (1.07, 1.96)
    concrete_band: tuple[float, float] = (4.85, 5.00)
    condition: int = 25
    min_side: int = 256
    canonical_side: int = 256
    per_concept_cap: int = 500
    # features
    attributes: list[str] = field(default_factory=lambda: list(DEFAULT_ATTRIBUTES))
    detections: str = ""
    hypernyms: str = ""
    vit_embeddings: str = ""
    simclr_embeddings: str = ""
    conf_min: float = 0.5
    # codebook
    codebook_k: int = 256
    codebook_max_descriptors: int = 200_000
    max_points: int = 200
    # models
    classifier: str = "RandomForest"
    classifier_params: dict = field(default_factory=dict)
    grid_search: bool = False
    folds: int = 5
    mc_splits: int = 20
    # run
    seed: int = 0
    out: str = "out"
    workers: int = 1

    def __post_init__(self):
        for name in self.attributes:
            try:
                Attribute(name)
            except ValueError:
                raise ValidationError(f"unknown attribute {name!r}") from None
        if self.condition < 2:
            raise ValidationError(f"condition must be >= 2 images per concept, got {self.condition}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")

    # -- identity -----------------------------------------------------------

    # Fields that shape shared artifacts (ingest output, codebook, feature
    # values). Attribute subsets, the condition, and model settings select or
    # parameterize files *within* the run directory instead: feature files are
    # per attribute, spectra and reports per condition, and reports embed the
    # model settings.
    _HASH_FIELDS = ("manifest", "norms", "abstract_band", "concrete_band",
                    "min_side", "canonical_side", "per_concept_cap",
                    "detections", "hypernyms", "vit_embeddings", "simclr_embeddings",
                    "conf_min", "codebook_k", "codebook_max_descriptors",
                    "max_points", "seed")

    def canonical(self) -> dict:
        data = asdict(self)
        data = {k: data[k] for k in self._HASH_FIELDS}
        data["abstract_band"] = list(self.abstract_band)
        data["concrete_band"] = list(self.concrete_band)
        return data

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]

    def run_dir(self) -> Path:
        return Path(self.out) / f"run-{self.config_hash()}"

    def provenance(self) -> dict:
        return {"config_hash": self.config_hash(), "seed": self.seed,
                "condition": self.condition, "attributes": list(self.attributes)}

    # -- path helpers ---------------------------------------------------------

    def require_paths(self, *names: str) -> None:
        for name in names:
            value = getattr(self, name)
            if not value:
                raise ValidationError(f"config field {name!r} is required for this step")
            if not Path(value).exists():
                raise ValidationError(f"{name} path does not exist: {value}")

    def selected_attributes(self) -> list[Attribute]:
        return [Attribute(a) for a in self.attributes]


_SECTION_FIELDS = {
    "corpus": ("manifest", "norms", "abstract_band", "concrete_band", "condition",
               "min_side", "canonical_side", "per_concept_cap"),
    "features": ("attributes", "detections", "hypernyms", "vit_embeddings",
                 "simclr_embeddings", "conf_min"),
    "codebook": ("codebook_k", "codebook_max_descriptors", "max_points"),
    "models": ("classifier", "classifier_params", "grid_search", "folds", "mc_splits"),
    "run": ("seed", "out", "workers"),
}

# TOML keys may drop the section prefix, e.g. [codebook] k = 256.
_SHORT_KEYS = {("codebook", "k"): "codebook_k",
               ("codebook", "max_descriptors"): "codebook_max_descriptors",
               ("models", "params"): "classifier_params"}


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional TOML file and flag overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"config file not found: {path}")
        with path.open("rb") as fh:
            try:
                doc = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ValidationError(f"{path}: invalid TOML: {exc}") from None
        base = path.parent
        for section, payload in doc.items():
            if section not in _SECTION_FIELDS:
                raise ValidationError(f"{path}: unknown config section [{section}]")
            if not isinstance(payload, dict):
                raise ValidationError(f"{path}: section [{section}] must be a table")
            for key, value in payload.items():
                name = _SHORT_KEYS.get((section, key), key)
                if name not in _SECTION_FIELDS[section]:
                    raise ValidationError(f"{path}: unknown key {key!r} in [{section}]")
                if name in ("manifest", "norms", "detections", "hypernyms",
                            "vit_embeddings", "simclr_embeddings", "out") and value:
                    value = str((base / value).resolve()) if not Path(value).is_absolute() else value
                values[name] = value
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
    for tup in ("abstract_band", "concrete_band"):
        if tup in values:
            band = values[tup]
            if len(band) != 2:
                raise ValidationError(f"{tup} must have two entries, got {band}")
            values[tup] = (float(band[0]), float(band[1]))
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ValidationError(f"bad config: {exc}") from None
