"""On-disk formats for feature stores, spectra, and reports.

Feature store: one JSON-Lines file per attribute with rows
`{"image_id","attribute","dim","values":[...]}`. Spectra:
`{"lemma","attribute","n","eigenvalues":[...]}`. Reports are JSON with sorted
keys so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .diversity import EigenSpectrum
from .errors import ParseError, ValidationError
from .types import Attribute, FeatureVector


def write_features(path, vectors, append: bool = False) -> int:
    """Write FeatureVectors as JSON Lines; returns the number of rows written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "a" if append else "w"
    n = 0
    with path.open(mode, encoding="utf-8") as fh:
        for fv in vectors:
            row = {
                "image_id": fv.image_id,
                "attribute": fv.attribute.value,
                "dim": fv.dim,
                "values": [float(v) for v in fv.values],
            }
            if fv.flags:
                row["flags"] = list(fv.flags)
            fh.write(json.dumps(row) + "\n")
            n += 1
    return n


def read_features(path) -> dict[str, FeatureVector]:
    path = Path(path)
    out: dict[str, FeatureVector] = {}
    dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                fv = FeatureVector(
                    image_id=str(obj["image_id"]),
                    attribute=Attribute(obj["attribute"]),
                    values=np.asarray(obj["values"], dtype=np.float64),
                    flags=tuple(obj.get("flags", ())),
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(path, lineno, f"bad feature row: {exc}") from None
            if int(obj["dim"]) != fv.dim:
                raise ParseError(path, lineno, f"dim field {obj['dim']} != {fv.dim} values")
            if dim is None:
                dim = fv.dim
            elif fv.dim != dim:
                raise ParseError(path, lineno, f"dim {fv.dim} differs from earlier rows ({dim})")
            if fv.image_id in out:
                raise ParseError(path, lineno, f"duplicate image_id {fv.image_id!r}")
            out[fv.image_id] = fv
    return out


def read_feature_ids(path) -> set[str]:
    """Cheap scan of the image_ids already present (for resumable extraction)."""
    path = Path(path)
    if not path.exists():
        return set()
    ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                ids.add(str(json.loads(line)["image_id"]))
    return ids


def write_spectra(path, spectra) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for sp in spectra:
            fh.write(json.dumps({
                "lemma": sp.lemma,
                "attribute": sp.attribute.value,
                "n": len(sp.eigenvalues),
                "eigenvalues": [float(v) for v in sp.eigenvalues],
            }) + "\n")
            n += 1
    return n


def read_spectra(path) -> dict[str, EigenSpectrum]:
    """Returns lemma -> EigenSpectrum for one attribute file."""
    path = Path(path)
    out: dict[str, EigenSpectrum] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                sp = EigenSpectrum(
                    lemma=str(obj["lemma"]),
                    attribute=Attribute(obj["attribute"]),
                    eigenvalues=np.asarray(obj["eigenvalues"], dtype=np.float64),
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(path, lineno, f"bad spectrum row: {exc}") from None
            if int(obj["n"]) != len(sp.eigenvalues):
                raise ParseError(path, lineno, "n field does not match eigenvalue count")
            out[sp.lemma] = sp
    return out


def write_report(path, payload: dict) -> None:
    """Deterministic JSON report: sorted keys, fixed float repr, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_rejects(path, rejects) -> None:
    """Rejects report: JSON Lines `{"image_id","reason"}`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for image_id, reason in rejects:
            fh.write(json.dumps({"image_id": image_id, "reason": reason}) + "\n")


def load_validated(path, kind: str):
    """Small helper used by the CLI for friendly missing-file errors."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"{kind} file not found: {path}")
    return path
