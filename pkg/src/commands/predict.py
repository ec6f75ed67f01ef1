#!/usr/bin/env python3
"""
Predict command: class and probability vector per image
"""

import argparse
import logging
from pathlib import Path
from typing import List, Sequence

from core.errors import UsageError
from core.types import LabeledImage
from corpus.images import read_image
from corpus.manifest import CorpusManifest
from network.checkpoint import load_checkpoint
from network.predictor import Prediction, predict, predict_manifest
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")


def predictions_text(predictions: Sequence[Prediction], class_names: Sequence[str]) -> str:
    lines = ["path\tpredicted\t" + "\t".join(f"p_{name}" for name in class_names)]
    for p in predictions:
        probabilities = "\t".join(f"{v:.6f}" for v in p.probabilities)
        lines.append(f"{p.path}\t{class_names[p.label]}\t{probabilities}")
    return "\n".join(lines) + "\n"


class PredictCommand(BaseCommand):
    """Predict images from a manifest or from explicit paths"""

    def __init__(self):
        super().__init__(name="predict", description="Predict classes for images with a trained checkpoint")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", required=True)
        parser.add_argument("--manifest", default=None)
        parser.add_argument("--split", default="", help="Only entries with this split tag")
        parser.add_argument("--image", action="append", default=[], help="Image path (repeatable)")
        parser.add_argument("--out", required=True, help="Output table (tab-separated)")
        parser.add_argument("--batch", type=int, default=8)
        parser.add_argument("--workers", type=int, default=0)

    def execute(self, args: argparse.Namespace) -> str:
        if not args.manifest and not args.image:
            raise UsageError("Give --manifest or at least one --image")
        model, config, _ = load_checkpoint(args.ckpt)

        predictions: List[Prediction] = []
        if args.manifest:
            manifest = CorpusManifest.load(args.manifest)
            entries = manifest.split(args.split) if args.split else manifest.entries
            predictions.extend(predict_manifest(model, config, manifest, entries, args.batch, args.workers))
        for path in args.image:
            image = LabeledImage(read_image(path, config.channels), 0, config.num_classes, path=str(path))
            predictions.append(predict(image, model, config))

        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(predictions_text(predictions, config.class_names), encoding="utf-8")
        return f"✅ {len(predictions)} predictions written to {out}"
