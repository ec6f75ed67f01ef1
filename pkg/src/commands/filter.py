#!/usr/bin/env python3
"""
Filter command: confidence-threshold triage of a manifest.

Images whose distressed score 1 - p(normal) reaches the threshold are kept for
review; the rest are filtered out as normal.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from core.errors import CheckpointError, ConfigError, UsageError
from core.types import NORMAL_CLASS_NAME
from corpus.manifest import CorpusManifest
from evaluation.metrics import ConfusionCounts, operating_threshold, scored_samples
from network.checkpoint import load_checkpoint
from network.predictor import predict_manifest
from training.settings import detection_scores
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")

KEPT_MANIFEST = "kept.tsv"
DROPPED_MANIFEST = "dropped.tsv"
SCORES_FILE = "scores.tsv"


class FilterCommand(BaseCommand):
    """Split a manifest into kept (likely distressed) and dropped (likely normal) images"""

    def __init__(self):
        super().__init__(
            name="filter",
            description="Keep images whose distressed score reaches a threshold",
        )

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", required=True, help="Detector or one-stage recognizer checkpoint")
        parser.add_argument("--manifest", required=True)
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--threshold", type=float, help="Distressed score threshold T")
        group.add_argument("--target-recall", type=float,
                           help="Pick T as the operating threshold reaching this recall on ground truth")
        parser.add_argument("--out", required=True, help="Output directory")
        parser.add_argument("--batch", type=int, default=8)
        parser.add_argument("--workers", type=int, default=0)

    def execute(self, args: argparse.Namespace) -> str:
        model, config, _ = load_checkpoint(args.ckpt)
        if config.normal_class is None:
            raise CheckpointError(f"{args.ckpt} has no normal class; filtering needs a detector or i-rec model")
        manifest = CorpusManifest.load(args.manifest)
        if not manifest.entries:
            raise ConfigError("Manifest has no entries")

        predictions = predict_manifest(model, config, manifest, None, args.batch, args.workers)
        scores = detection_scores(np.stack([p.probabilities for p in predictions]), config.normal_class)
        has_truth = manifest.normal_class is not None
        positives = np.array([e.class_name != NORMAL_CLASS_NAME for e in manifest.entries])

        threshold = args.threshold
        if args.target_recall is not None:
            if not 0.0 < args.target_recall <= 1.0:
                raise UsageError(f"--target-recall must be in (0, 1], got {args.target_recall}")
            if not has_truth or not positives.any():
                raise UsageError("--target-recall needs a manifest with normal and distressed ground truth")
            threshold, _ = operating_threshold(scored_samples(scores, positives), args.target_recall)
            logger.info("Operating threshold for recall %.2f: %.6f", args.target_recall, threshold)

        kept_mask = scores >= threshold
        kept = manifest.subset(e for e, k in zip(manifest.entries, kept_mask) if k)
        dropped = manifest.subset(e for e, k in zip(manifest.entries, kept_mask) if not k)
        out = Path(args.out)
        kept.save(out / KEPT_MANIFEST)
        dropped.save(out / DROPPED_MANIFEST)
        lines = ["path\tscore\tkept"]
        lines.extend(f"{e.path}\t{s!r}\t{int(k)}" for e, s, k in zip(manifest.entries, scores.tolist(), kept_mask))
        (out / SCORES_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

        message = [f"✅ threshold {threshold:.6f}: kept {len(kept)}, dropped {len(dropped)} of {len(manifest)}"]
        if has_truth and positives.any():
            counts = ConfusionCounts(
                tp=int((kept_mask & positives).sum()),
                fp=int((kept_mask & ~positives).sum()),
                fn=int((~kept_mask & positives).sum()),
                tn=int((~kept_mask & ~positives).sum()),
            )
            message.append(f"   kept-set recall {counts.recall:.4f}, precision {counts.precision:.4f}")
        return "\n".join(message)
