"""End-to-end pipeline steps behind the CLI subcommands.

Every step reads/writes under ``config.run_dir()`` and returns a summary dict
(also persisted as JSON). Per-image work is pure and runs on a worker pool;
results are written in manifest order, so worker count never changes output
bytes.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import plots, store
from .config import RunConfig
from .corpus import (
    Manifest,
    decode_image,
    dedup_exact,
    filter_min_size,
    load_manifest,
    load_norms,
    normalize_image,
    partition_manifest,
    to_gray,
)
from .diversity import combine, eigenspectrum, similarity_matrix
from .embeddings import ingest_embeddings
from .errors import ValidationError
from .features.basic import color_hsv, hog, texture
from .features.objects import (
    availability_stats,
    hypernym_counts,
    ingest_detections,
    load_hypernym_map,
    location_grid,
)
from .features.scene import (
    bow_encode,
    build_codebook,
    detect_and_describe,
    gist,
    load_codebook,
    save_codebook,
)
from .learning import (
    DEFAULT_GRIDS,
    ModelKind,
    ModelSpec,
    grid_search,
    kfold_classify,
    mc_regress,
)
from .neighbors import neighbor_report
from .reference import REPORT_ATTRIBUTE_ROWS
from .types import Attribute, BASIC_ATTRIBUTES, ClassLabel, FeatureVector

PIXEL_ATTRIBUTES = (Attribute.COLOR, Attribute.HOG, Attribute.TEXTURE,
                    Attribute.GIST, Attribute.SURF)
STANDARD_CONDITIONS = (25, 100, 200, 300, 400, 500)
COMBINED_BASIC = "CombinedBasic"

_CODEBOOK_CACHE: dict[str, object] = {}


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

def clean_manifest_path(cfg: RunConfig) -> Path:
    return cfg.run_dir() / "ingest" / "manifest.jsonl"


def codebook_path(cfg: RunConfig) -> Path:
    return cfg.run_dir() / "codebook" / "surf.codebook"


def feature_path(cfg: RunConfig, attr: Attribute) -> Path:
    return cfg.run_dir() / "features" / f"{attr.value}.jsonl"


def spectra_path(cfg: RunConfig, attr: Attribute) -> Path:
    return cfg.run_dir() / "spectra" / f"condition-{cfg.condition}" / f"{attr.value}.jsonl"


def reports_dir(cfg: RunConfig) -> Path:
    return cfg.run_dir() / "reports" / f"condition-{cfg.condition}"


def _load_clean_manifest(cfg: RunConfig) -> Manifest:
    path = clean_manifest_path(cfg)
    if not path.exists():
        raise ValidationError(f"no ingested manifest at {path}; run the `ingest` step first")
    return load_manifest(path, per_concept_cap=cfg.per_concept_cap)


def _class_map(cfg: RunConfig) -> dict[str, str]:
    norms = load_norms(cfg.norms, cfg.abstract_band, cfg.concrete_band)
    return {e.lemma: e.class_label.value for e in norms
            if e.class_label is not ClassLabel.EXCLUDED}


def _rating_map(cfg: RunConfig) -> dict[str, float]:
    norms = load_norms(cfg.norms, cfg.abstract_band, cfg.concrete_band)
    return {e.lemma: e.rating for e in norms}


def _condition_slices(cfg: RunConfig, manifest: Manifest) -> dict[str, list]:
    """First ``condition`` images of every labeled concept that has enough;
    the same slicing feeds diversity, neighbors, and stats."""
    classes = _class_map(cfg)
    groups: dict[str, list] = {}
    for rec in manifest.records:
        if rec.lemma in classes:
            groups.setdefault(rec.lemma, []).append(rec)
    return {lemma: recs[:cfg.condition]
            for lemma, recs in sorted(groups.items())
            if len(recs) >= cfg.condition}


def _availability_table(cfg: RunConfig, manifest: Manifest) -> dict[str, dict[str, int]]:
    """Concepts per class with at least N images, for the standard conditions."""
    classes = _class_map(cfg)
    sizes: dict[str, int] = {}
    for rec in manifest.records:
        if rec.lemma in classes:
            sizes[rec.lemma] = sizes.get(rec.lemma, 0) + 1
    table: dict[str, dict[str, int]] = {}
    for cond in STANDARD_CONDITIONS:
        counts = {ClassLabel.ABSTRACT.value: 0, ClassLabel.CONCRETE.value: 0}
        for lemma, n in sizes.items():
            if n >= cond:
                counts[classes[lemma]] += 1
        table[str(cond)] = counts
    return table


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def ingest_run(cfg: RunConfig) -> dict:
    cfg.require_paths("manifest", "norms")
    norms = load_norms(cfg.norms, cfg.abstract_band, cfg.concrete_band)
    manifest = load_manifest(cfg.manifest, per_concept_cap=cfg.per_concept_cap)
    sized, too_small = filter_min_size(manifest.records, cfg.min_side)
    dedup = dedup_exact(sized)
    partition = partition_manifest(Manifest(dedup.kept, cfg.per_concept_cap), norms,
                                   min_images=2)

    order = {rec.image_id: i for i, rec in enumerate(manifest.records)}
    kept_records = [r for recs in (*partition.abstract.values(), *partition.concrete.values())
                    for r in recs]
    kept_records.sort(key=lambda r: order[r.image_id])

    out_dir = cfg.run_dir() / "ingest"
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "manifest.jsonl").open("w", encoding="utf-8") as fh:
        for rec in kept_records:
            fh.write(json.dumps({
                "image_id": rec.image_id, "lemma": rec.lemma,
                "dataset_tag": rec.dataset_tag, "path": rec.source_path,
                "width": rec.width, "height": rec.height,
            }) + "\n")

    rejects = ([(r.image_id, "below_min_side") for r in too_small]
               + dedup.rejects
               + [(image_id, "exact_duplicate") for image_id in dedup.dropped])
    store.write_rejects(out_dir / "rejects.jsonl", rejects)

    summary = {
        "provenance": cfg.provenance(),
        "input_records": len(manifest.records),
        "cap_truncated": manifest.truncated,
        "below_min_side": len(too_small),
        "undecodable": len(dedup.rejects),
        "exact_duplicates": len(dedup.dropped),
        "kept_records": len(kept_records),
        "partition": partition.report,
        "availability": _availability_table(cfg, Manifest(kept_records, cfg.per_concept_cap)),
    }
    store.write_report(out_dir / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# codebook
# ---------------------------------------------------------------------------

def _descriptor_task(payload: dict):
    try:
        img = decode_image(payload["path"])
    except Exception as exc:
        return payload["image_id"], None, f"undecodable: {exc}"
    gray = to_gray(normalize_image(img, payload["side"]))
    pts = detect_and_describe(gray, max_points=payload["max_points"])
    if not pts:
        return payload["image_id"], np.zeros((0, 64)), None
    return payload["image_id"], np.stack([p.descriptor for p in pts]), None


def _pool_map(cfg: RunConfig, fn, payloads):
    if cfg.workers == 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, payloads, chunksize=8))


def codebook_run(cfg: RunConfig) -> dict:
    manifest = _load_clean_manifest(cfg)
    payloads = [{"image_id": r.image_id, "path": r.source_path,
                 "side": cfg.canonical_side, "max_points": cfg.max_points}
                for r in manifest.records]
    results = _pool_map(cfg, _descriptor_task, payloads)
    blocks = [descs for _, descs, err in results if err is None and descs is not None and len(descs)]
    unreadable = sum(1 for _, _, err in results if err)
    if not blocks:
        raise ValidationError("no descriptors found; cannot build a codebook")
    descriptors = np.concatenate(blocks, axis=0)
    if len(descriptors) > cfg.codebook_max_descriptors:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([cfg.seed & 0xFFFFFFFFFFFFFFFF, 0xC0DE])))
        pick = rng.choice(len(descriptors), size=cfg.codebook_max_descriptors, replace=False)
        descriptors = descriptors[np.sort(pick)]
    book = build_codebook(descriptors, cfg.codebook_k, cfg.seed)
    path = codebook_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_codebook(book, path)
    summary = {
        "provenance": cfg.provenance(),
        "images": len(payloads),
        "unreadable": unreadable,
        "descriptors": int(book.training_size),
        "k": book.k,
        "iterations": len(book.inertia_history),
        "final_inertia": book.inertia_history[-1] if book.inertia_history else None,
    }
    store.write_report(path.parent / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def _pixel_task(payload: dict):
    """Compute the requested pixel attributes for one image.

    Returns (image_id, {attribute value -> (values, flags)}, error)."""
    try:
        img = decode_image(payload["path"])
    except Exception as exc:
        return payload["image_id"], {}, f"undecodable: {exc}"
    canonical = normalize_image(img, payload["side"])
    gray = to_gray(canonical)
    image_id = payload["image_id"]
    out: dict[str, tuple[list, tuple]] = {}
    for name in payload["attrs"]:
        attr = Attribute(name)
        if attr is Attribute.COLOR:
            fv = color_hsv(canonical, image_id)
        elif attr is Attribute.HOG:
            fv = hog(gray, image_id)
        elif attr is Attribute.TEXTURE:
            fv = texture(gray, image_id)
        elif attr is Attribute.GIST:
            fv = gist(gray, image_id)
        else:
            book = _CODEBOOK_CACHE.get(payload["codebook"])
            if book is None:
                book = load_codebook(payload["codebook"])
                _CODEBOOK_CACHE[payload["codebook"]] = book
            pts = detect_and_describe(gray, max_points=payload["max_points"])
            fv = bow_encode(pts, book, image_id)
        out[name] = (fv.values.tolist(), fv.flags)
    return image_id, out, None


def extract_run(cfg: RunConfig) -> dict:
    manifest = _load_clean_manifest(cfg)
    requested = cfg.selected_attributes()
    summary: dict = {"provenance": cfg.provenance(), "attributes": {}}

    pixel_attrs = [a for a in requested if a in PIXEL_ATTRIBUTES]
    if pixel_attrs:
        if Attribute.SURF in pixel_attrs and not codebook_path(cfg).exists():
            raise ValidationError(
                f"SURF extraction needs a codebook at {codebook_path(cfg)}; "
                "run the `codebook` step first")
        existing = {a: store.read_feature_ids(feature_path(cfg, a)) for a in pixel_attrs}
        payloads = []
        for rec in manifest.records:
            needed = [a.value for a in pixel_attrs if rec.image_id not in existing[a]]
            if needed:
                payloads.append({
                    "image_id": rec.image_id, "path": rec.source_path,
                    "side": cfg.canonical_side, "attrs": needed,
                    "codebook": str(codebook_path(cfg)), "max_points": cfg.max_points,
                })
        results = _pool_map(cfg, _pixel_task, payloads)
        unreadable = [(image_id, err) for image_id, _, err in results if err]
        new_rows: dict[Attribute, list] = {a: [] for a in pixel_attrs}
        for image_id, values, err in results:
            if err:
                continue
            for name, (vals, flags) in values.items():
                attr = Attribute(name)
                new_rows[attr].append(FeatureVector(image_id, attr, np.asarray(vals), tuple(flags)))
        for attr in pixel_attrs:
            written = store.write_features(feature_path(cfg, attr), new_rows[attr], append=True)
            summary["attributes"][attr.value] = {
                "new_rows": written, "skipped_existing": len(existing[attr]),
            }
        if unreadable:
            summary["unreadable"] = {image_id: err for image_id, err in unreadable}
            store.write_rejects(cfg.run_dir() / "features" / "rejects.jsonl", unreadable)

    object_attrs = [a for a in requested if a in (Attribute.YOLO, Attribute.OBJECT_LOC)]
    if object_attrs:
        cfg.require_paths("detections")
        index = ingest_detections(cfg.detections)
        hmap = None
        if Attribute.YOLO in object_attrs:
            cfg.require_paths("hypernyms")
            hmap = load_hypernym_map(cfg.hypernyms)
        for attr in object_attrs:
            existing_ids = store.read_feature_ids(feature_path(cfg, attr))
            rows = []
            for rec in manifest.records:
                if rec.image_id in existing_ids:
                    continue
                dets = index.for_image(rec.image_id)
                if attr is Attribute.YOLO:
                    rows.append(hypernym_counts(dets, hmap, cfg.conf_min, rec.image_id))
                else:
                    rows.append(location_grid(dets, rec.image_id))
            written = store.write_features(feature_path(cfg, attr), rows, append=True)
            summary["attributes"][attr.value] = {
                "new_rows": written, "skipped_existing": len(existing_ids),
                "rejected_detections": index.rejected,
            }

    deep_attrs = [a for a in requested if a in (Attribute.SIMCLR, Attribute.VIT)]
    for attr in deep_attrs:
        field = "vit_embeddings" if attr is Attribute.VIT else "simclr_embeddings"
        cfg.require_paths(field)
        loaded = ingest_embeddings(getattr(cfg, field))
        got_attr = next(iter(loaded.values())).attribute if loaded else attr
        if got_attr is not attr:
            raise ValidationError(
                f"{field} file carries {got_attr.value} embeddings, expected {attr.value}")
        existing_ids = store.read_feature_ids(feature_path(cfg, attr))
        rows, missing = [], 0
        for rec in manifest.records:
            if rec.image_id in existing_ids:
                continue
            if rec.image_id in loaded:
                rows.append(loaded[rec.image_id])
            else:
                missing += 1
        written = store.write_features(feature_path(cfg, attr), rows, append=True)
        summary["attributes"][attr.value] = {
            "new_rows": written, "skipped_existing": len(existing_ids),
            "missing_embeddings": missing,
        }

    store.write_report(cfg.run_dir() / "features" / "extract_summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# diversity
# ---------------------------------------------------------------------------

def diversity_run(cfg: RunConfig) -> dict:
    manifest = _load_clean_manifest(cfg)
    slices = _condition_slices(cfg, manifest)
    if not slices:
        raise ValidationError(
            f"no concept has {cfg.condition} images at condition {cfg.condition}")
    summary: dict = {"provenance": cfg.provenance(), "attributes": {}}
    for attr in cfg.selected_attributes():
        fpath = feature_path(cfg, attr)
        if not fpath.exists():
            raise ValidationError(f"no features for {attr.value} at {fpath}; run `extract` first")
        feats = store.read_features(fpath)
        spectra = []
        dropped_missing = 0
        zero_flagged = 0
        for lemma, recs in slices.items():
            if any(r.image_id not in feats for r in recs):
                dropped_missing += 1
                continue
            sim = similarity_matrix([feats[r.image_id] for r in recs], lemma, attr)
            zero_flagged += len(sim.zero_rows)
            spectra.append(eigenspectrum(sim))
        written = store.write_spectra(spectra_path(cfg, attr), spectra)
        summary["attributes"][attr.value] = {
            "concepts": written,
            "dropped_missing_features": dropped_missing,
            "zero_vector_images": zero_flagged,
        }
    store.write_report(spectra_path(cfg, cfg.selected_attributes()[0]).parent / "summary.json",
                       summary)
    return summary


# ---------------------------------------------------------------------------
# study helpers
# ---------------------------------------------------------------------------

def _feature_sets(cfg: RunConfig) -> dict[str, list[Attribute]]:
    attrs = cfg.selected_attributes()
    sets = {a.value: [a] for a in attrs}
    if all(a in attrs for a in BASIC_ATTRIBUTES):
        sets[COMBINED_BASIC] = list(BASIC_ATTRIBUTES)
    return sets


def _load_samples(cfg: RunConfig, attrs: list[Attribute]):
    classes = _class_map(cfg)
    ratings = _rating_map(cfg)
    per_attr = {}
    for attr in attrs:
        path = spectra_path(cfg, attr)
        if not path.exists():
            raise ValidationError(f"no spectra for {attr.value} at {path}; run `diversity` first")
        per_attr[attr] = store.read_spectra(path)
    lemmas = sorted(set.intersection(*(set(v) for v in per_attr.values())))
    samples = []
    for lemma in lemmas:
        if lemma not in classes:
            continue
        samples.append(combine({a: per_attr[a][lemma] for a in attrs}, attrs,
                               lemma=lemma, class_label=classes[lemma],
                               rating=ratings.get(lemma)))
    if not samples:
        raise ValidationError("no labeled concepts with spectra for this feature set")
    return samples


def _ordered_set_names(sets: dict) -> list[str]:
    return [name for name in REPORT_ATTRIBUTE_ROWS if name in sets] + \
           [name for name in sets if name not in REPORT_ATTRIBUTE_ROWS]


def _class_counts(samples) -> dict[str, int]:
    counts: dict[str, int] = {}
    for s in samples:
        counts[s.class_label] = counts.get(s.class_label, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# classify / regress / neighbors / stats
# ---------------------------------------------------------------------------

def classify_run(cfg: RunConfig) -> dict:
    kind = ModelKind(cfg.classifier)
    if kind is ModelKind.GRADIENT_BOOSTED_TREES:
        raise ValidationError("classification uses RandomForest or LogisticRegression")
    sets = _feature_sets(cfg)
    report: dict = {"provenance": cfg.provenance(), "classifier": kind.value,
                    "folds": cfg.folds, "feature_sets": {}}
    manifest = _load_clean_manifest(cfg)
    availability = _availability_table(cfg, manifest)
    for name in _ordered_set_names(sets):
        samples = _load_samples(cfg, sets[name])
        counts = _class_counts(samples)
        if len(counts) < 2 or min(counts.values()) < cfg.folds:
            raise ValidationError(
                f"feature set {name}: concepts per class {counts} cannot fill "
                f"k={cfg.folds} folds at condition {cfg.condition}; "
                f"concepts with >= N images per class: {availability}")
        if cfg.grid_search:
            spec, eval_report = grid_search(samples, kind, DEFAULT_GRIDS[kind],
                                            k=cfg.folds, seed=cfg.seed)
        else:
            spec = ModelSpec(kind=kind, hyper_params=dict(cfg.classifier_params), seed=cfg.seed)
            eval_report = kfold_classify(samples, spec, k=cfg.folds, seed=cfg.seed)
        entry = eval_report.to_dict()
        entry["n_concepts"] = counts
        report["feature_sets"][name] = entry

    rdir = reports_dir(cfg)
    store.write_report(rdir / "classify.json", report)
    weighted = {name: report["feature_sets"][name]["weighted_f1"]
                for name in report["feature_sets"]}
    plots.score_bars(weighted, rdir / "classify_f1.svg",
                     f"Weighted F1 by feature set (condition {cfg.condition})", "weighted F1")
    per_class = {name: report["feature_sets"][name]["per_class_f1"]
                 for name in report["feature_sets"]}
    plots.classwise_bars(per_class, rdir / "classify_classwise.svg",
                         f"Class-wise F1 (condition {cfg.condition})", "F1")
    store.write_csv(rdir / "classify_summary.csv",
                    ["feature_set", "weighted_f1", "f1_abstract", "f1_concrete"],
                    [[name, f"{weighted[name]:.6f}",
                      f"{per_class[name].get('Abstract', float('nan')):.6f}",
                      f"{per_class[name].get('Concrete', float('nan')):.6f}"]
                     for name in report["feature_sets"]])
    return report


def regress_run(cfg: RunConfig) -> dict:
    sets = _feature_sets(cfg)
    report: dict = {"provenance": cfg.provenance(), "splits": cfg.mc_splits,
                    "feature_sets": {}}
    for name in _ordered_set_names(sets):
        samples = _load_samples(cfg, sets[name])
        spec = ModelSpec(kind=ModelKind.GRADIENT_BOOSTED_TREES, seed=cfg.seed)
        reg = mc_regress(samples, spec, splits=cfg.mc_splits, seed=cfg.seed)
        entry = reg.to_dict()
        entry["n_concepts"] = len(samples)
        report["feature_sets"][name] = entry

    rdir = reports_dir(cfg)
    store.write_report(rdir / "regress.json", report)
    rho = {n: report["feature_sets"][n]["spearman_rho"] for n in report["feature_sets"]}
    err = {n: report["feature_sets"][n]["rmse"] for n in report["feature_sets"]}
    plots.score_bars(rho, rdir / "regress_rho.svg",
                     f"Rating regression: Spearman rho (condition {cfg.condition})",
                     "Spearman rho", ylim=(-1.0, 1.0))
    plots.score_bars(err, rdir / "regress_rmse.svg",
                     f"Rating regression: RMSE (condition {cfg.condition})", "RMSE", ylim=None)
    store.write_csv(rdir / "regress_summary.csv",
                    ["feature_set", "spearman_rho", "rmse"],
                    [[n, f"{rho[n]:.6f}", f"{err[n]:.6f}"] for n in report["feature_sets"]])
    return report


def neighbors_run(cfg: RunConfig) -> dict:
    manifest = _load_clean_manifest(cfg)
    slices = _condition_slices(cfg, manifest)
    classes = _class_map(cfg)
    records = [r for recs in slices.values() for r in recs]
    if len(records) < cfg.condition + 1:
        raise ValidationError(
            f"top-{cfg.condition} neighbors need at least {cfg.condition + 1} images "
            f"across concepts, have {len(records)}")
    topn = cfg.condition
    rdir = reports_dir(cfg)
    summary: dict = {"provenance": cfg.provenance(), "topn": topn, "attributes": {}}
    csv_rows = []
    heat_rows, heat_vals = [], []
    for attr in cfg.selected_attributes():
        fpath = feature_path(cfg, attr)
        if not fpath.exists():
            raise ValidationError(f"no features for {attr.value} at {fpath}; run `extract` first")
        feats = store.read_features(fpath)
        usable = [r for r in records if r.image_id in feats]
        if len(usable) < topn + 1:
            raise ValidationError(
                f"{attr.value}: only {len(usable)} of {len(records)} sliced images have "
                f"features; top-{topn} neighbors need at least {topn + 1} (rerun `extract`)")
        ids = [r.image_id for r in usable]
        lemmas = [r.lemma for r in usable]
        vectors = np.stack([feats[r.image_id].values for r in usable])
        rep = neighbor_report(ids, lemmas, vectors, topn=topn, class_of=classes)
        payload = rep.to_dict()
        payload["provenance"] = cfg.provenance()
        store.write_report(rdir / "neighbors" / f"{attr.value}.json", payload)
        summary["attributes"][attr.value] = {
            "per_class": rep.per_class,
            "mean_topk_similarity": rep.mean_topk_similarity,
            "zero_vectors": len(rep.zero_vector_ids),
            "images": len(usable),
        }
        csv_rows.append([attr.value,
                         f"{rep.per_class.get('Abstract', float('nan')):.4f}",
                         f"{rep.per_class.get('Concrete', float('nan')):.4f}"])
        heat_rows.append(attr.value)
        heat_vals.append([rep.per_class.get("Abstract", np.nan),
                          rep.per_class.get("Concrete", np.nan)])

    store.write_report(rdir / "neighbors.json", summary)
    store.write_csv(rdir / "neighbors_summary.csv",
                    ["attribute", "Abstract", "Concrete"], csv_rows)
    plots.class_heatmap(heat_rows, ["Abstract", "Concrete"], heat_vals,
                        rdir / "neighbors_heatmap.svg",
                        f"Same-concept neighbors % (top {topn})")
    return summary


def stats_run(cfg: RunConfig) -> dict:
    manifest = _load_clean_manifest(cfg)
    availability = _availability_table(cfg, manifest)
    summary: dict = {"provenance": cfg.provenance(),
                     "concepts_by_condition": availability}
    rdir = reports_dir(cfg)
    store.write_csv(rdir / "stats_concepts.csv",
                    ["condition", "Abstract", "Concrete"],
                    [[cond, counts["Abstract"], counts["Concrete"]]
                     for cond, counts in availability.items()])
    if cfg.detections:
        cfg.require_paths("detections")
        index = ingest_detections(cfg.detections)
        slices = _condition_slices(cfg, manifest)
        classes = _class_map(cfg)
        groups: dict[str, dict[str, list]] = {"Abstract": {}, "Concrete": {}}
        for lemma, recs in slices.items():
            groups[classes[lemma]][lemma] = recs
        detect_pct = availability_stats(groups, index)
        summary["detection_availability"] = detect_pct
        store.write_csv(rdir / "stats_availability.csv",
                        ["class", "pct_images_with_detection"],
                        [[c, f"{v:.4f}"] for c, v in sorted(detect_pct.items())])
        plots.score_bars(detect_pct, rdir / "stats_availability.svg",
                         f"Images with >= 1 detection (condition {cfg.condition})",
                         "% of images", ylim=(0, 100))
    store.write_report(rdir / "stats.json", summary)
    return summary


def report_run(cfg: RunConfig) -> dict:
    """Aggregate whatever studies have run into one summary + overview figure."""
    rdir = reports_dir(cfg)
    summary: dict = {"provenance": cfg.provenance(), "studies": {}, "missing": []}
    for study in ("classify", "regress", "neighbors", "stats"):
        path = rdir / f"{study}.json"
        if path.exists():
            summary["studies"][study] = json.loads(path.read_text(encoding="utf-8"))
        else:
            summary["missing"].append(study)

    csv_rows = []
    if "classify" in summary["studies"]:
        for name, entry in summary["studies"]["classify"]["feature_sets"].items():
            csv_rows.append(["classify", name, "weighted_f1", f"{entry['weighted_f1']:.6f}"])
    if "regress" in summary["studies"]:
        for name, entry in summary["studies"]["regress"]["feature_sets"].items():
            csv_rows.append(["regress", name, "spearman_rho", f"{entry['spearman_rho']:.6f}"])
            csv_rows.append(["regress", name, "rmse", f"{entry['rmse']:.6f}"])
    if "neighbors" in summary["studies"]:
        for name, entry in summary["studies"]["neighbors"]["attributes"].items():
            for cls, pct in entry["per_class"].items():
                csv_rows.append(["neighbors", name, f"same_concept_pct_{cls}", f"{pct:.4f}"])
    store.write_csv(rdir / "summary.csv", ["study", "feature_set", "metric", "value"], csv_rows)

    if "classify" in summary["studies"]:
        weighted = {n: e["weighted_f1"]
                    for n, e in summary["studies"]["classify"]["feature_sets"].items()}
        plots.score_bars(weighted, rdir / "report_overview.svg",
                         "Classification overview", "weighted F1")
    store.write_report(rdir / "summary.json", summary)
    return summary
