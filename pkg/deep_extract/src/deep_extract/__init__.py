"""deep-extract: batch inference over an image manifest, exporting dense
embeddings and object detections in the analysis toolkit's file formats."""

__version__ = "0.1.0"
