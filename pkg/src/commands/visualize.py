#!/usr/bin/env python3
"""
Visualize command: patch-level overlay and sidecar for one image
"""

import argparse
import logging
from pathlib import Path

from core.errors import CheckpointError
from core.types import LabeledImage, Strategy
from corpus.images import read_image
from evaluation.overlay import render_overlay
from network.checkpoint import load_checkpoint
from network.predictor import predict
from patching import resize_to
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")


class VisualizeCommand(BaseCommand):
    """Render per-patch labels of one image"""

    def __init__(self):
        super().__init__(name="visualize", description="Export a patch label overlay and its sidecar")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", required=True)
        parser.add_argument("--image", required=True)
        parser.add_argument("--out", required=True, help="Output directory")
        parser.add_argument("--strategy", choices=[s.value for s in Strategy], default=None,
                            help="Expected patch strategy; must match the checkpoint")

    def execute(self, args: argparse.Namespace) -> str:
        model, config, _ = load_checkpoint(args.ckpt)
        if args.strategy is not None and Strategy.parse(args.strategy) is not config.strategy:
            raise CheckpointError(
                f"Checkpoint uses strategy '{config.strategy.value}', not '{args.strategy}'"
            )
        pixels = resize_to(read_image(args.image, config.channels), config.pyramid.source_dims)
        prediction = predict(LabeledImage(pixels, 0, config.num_classes, path=args.image), model, config)
        artifact = render_overlay(pixels, prediction.boxes, prediction.confidences, list(config.class_names))
        image_path, sidecar_path = artifact.write(args.out, Path(args.image).stem)
        return (
            f"🖼️ {args.image}: predicted {config.class_names[prediction.label]} "
            f"(p={prediction.probabilities[prediction.label]:.4f}), {len(artifact.tagged)} tagged patches\n"
            f"   overlay: {image_path}\n   sidecar: {sidecar_path}"
        )
