"""deep-extract command line: one command, model kind decides the output.

    deep-extract --model vit-b16 --manifest images.jsonl --out vit.vdem
    deep-extract --model blob --manifest images.jsonl --out detections.jsonl

Exit codes: 0 success, 1 bad input, 2 runtime failure.
"""

from __future__ import annotations

import sys

import click

from . import runner


@click.command(help=__doc__)
@click.option("--model", "model_tag", required=True,
              help="vit-b16, vit-tiny, simclr-r50, simclr-r18, blob, fasterrcnn-r50")
@click.option("--manifest", required=True, type=click.Path(exists=True),
              help="Image manifest (JSON Lines).")
@click.option("--out", "out_path", required=True, help="Output file path.")
@click.option("--checkpoint", default=None, type=click.Path(exists=True),
              help="Model weights; omitted means seeded random init (schema runs only).")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--batch-size", default=8, type=int, show_default=True)
@click.option("--conf-min", default=0.0, type=float, show_default=True,
              help="Minimum confidence for exported detections.")
@click.option("--format", "file_format", default="binary",
              type=click.Choice(["binary", "jsonl"]), show_default=True,
              help="Embedding output format.")
@click.option("--device", default="cpu", show_default=True)
def main(model_tag, manifest, out_path, checkpoint, seed, batch_size, conf_min,
         file_format, device):
    try:
        kind = runner.model_kind(model_tag)
        runner.ensure_parent(out_path)
        if kind == "embeddings":
            summary = runner.export_embeddings(
                manifest, out_path, model_tag, seed=seed, checkpoint=checkpoint,
                batch_size=batch_size, device=device, file_format=file_format)
        else:
            summary = runner.export_detections(
                manifest, out_path, model_tag, seed=seed, checkpoint=checkpoint,
                conf_min=conf_min, device=device)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(2)
    for key, value in summary.items():
        click.echo(f"{key}: {value}")


if __name__ == "__main__":
    main()
