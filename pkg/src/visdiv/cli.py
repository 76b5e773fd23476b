"""Command-line entry point.

Subcommands: ingest, codebook, extract, diversity, classify, regress,
neighbors, stats, report. Configuration comes from a TOML file; flags
override it. Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import logging
import sys

import click

from . import pipeline
from .config import load_config
from .errors import ValidationError

log = logging.getLogger("visdiv")


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="TOML config file.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the run seed.")(fn)
    fn = click.option("--condition", type=int, default=None,
                      help="Images per concept for this experiment.")(fn)
    fn = click.option("--attributes", default=None,
                      help="Comma-separated attribute list (e.g. Color,HOG,Texture).")(fn)
    fn = click.option("--out", default=None, help="Output root directory.")(fn)
    fn = click.option("--workers", type=int, default=None, help="Worker processes.")(fn)
    return fn


def _build_config(config_path, seed, condition, attributes, out, workers, **extra):
    overrides = {"seed": seed, "condition": condition, "out": out, "workers": workers}
    if attributes:
        overrides["attributes"] = [a.strip() for a in attributes.split(",") if a.strip()]
    overrides.update({k: v for k, v in extra.items() if v is not None})
    return load_config(config_path, overrides)


def _run(step, config_path, seed, condition, attributes, out, workers, **extra):
    try:
        cfg = _build_config(config_path, seed, condition, attributes, out, workers, **extra)
        summary = step(cfg)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        log.exception("runtime failure")
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(2)
    click.echo(f"run directory: {cfg.run_dir()}")
    for key, value in summary.items():
        if key in ("provenance",):
            continue
        click.echo(f"  {key}: {value}" if not isinstance(value, dict)
                   else f"  {key}: {len(value)} entries")
    return 0


@click.group(help=__doc__)
def main():
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command(help="Validate, dedup, and partition the corpus.")
@_common_options
@click.option("--manifest", default=None, help="Image manifest (JSON Lines).")
@click.option("--norms", default=None, help="Concreteness norms CSV.")
def ingest(config_path, seed, condition, attributes, out, workers, manifest, norms):
    _run(pipeline.ingest_run, config_path, seed, condition, attributes, out, workers,
         manifest=manifest, norms=norms)


@main.command(help="Build the bag-of-visual-words codebook.")
@_common_options
@click.option("--k", "codebook_k", type=int, default=None, help="Number of visual words.")
def codebook(config_path, seed, condition, attributes, out, workers, codebook_k):
    _run(pipeline.codebook_run, config_path, seed, condition, attributes, out, workers,
         codebook_k=codebook_k)


@main.command(help="Extract per-image feature vectors (resumable).")
@_common_options
def extract(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.extract_run, config_path, seed, condition, attributes, out, workers)


@main.command(help="Build per-concept similarity matrices and eigenspectra.")
@_common_options
def diversity(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.diversity_run, config_path, seed, condition, attributes, out, workers)


@main.command(help="Abstract/concrete classification from eigenspectra.")
@_common_options
@click.option("--classifier", default=None,
              help="RandomForest or LogisticRegression.")
@click.option("--grid-search/--no-grid-search", "grid_search_flag", default=None,
              help="Search the default hyper-parameter grid.")
def classify(config_path, seed, condition, attributes, out, workers, classifier,
             grid_search_flag):
    _run(pipeline.classify_run, config_path, seed, condition, attributes, out, workers,
         classifier=classifier, grid_search=grid_search_flag)


@main.command(help="Concreteness rating regression (gradient boosted trees).")
@_common_options
def regress(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.regress_run, config_path, seed, condition, attributes, out, workers)


@main.command(help="Cross-concept nearest-neighbor analysis.")
@_common_options
def neighbors(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.neighbors_run, config_path, seed, condition, attributes, out, workers)


@main.command(help="Corpus availability statistics.")
@_common_options
def stats(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.stats_run, config_path, seed, condition, attributes, out, workers)


@main.command(help="Aggregate completed studies into one summary report.")
@_common_options
def report(config_path, seed, condition, attributes, out, workers):
    _run(pipeline.report_run, config_path, seed, condition, attributes, out, workers)


if __name__ == "__main__":
    main()
