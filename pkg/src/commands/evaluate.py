#!/usr/bin/env python3
"""
Evaluate command: single-model settings and the chained ii-rec-n protocol
"""

import argparse
import logging

from core.errors import UsageError
from core.types import Setting
from corpus.manifest import CorpusManifest
from network.checkpoint import load_checkpoint
from training.protocols import evaluate_model, evaluate_two_stage
from training.settings import derive_setting_view
from .base_command import BaseCommand

logger = logging.getLogger("patchlabel_commands")


class EvaluateCommand(BaseCommand):
    """Write an evaluation report for a checkpoint (or a detector/recognizer chain)"""

    def __init__(self):
        super().__init__(
            name="evaluate",
            description="Evaluate a checkpoint; ii-rec-n chains --detector-ckpt with --ckpt",
        )

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--ckpt", required=True, help="Model checkpoint (the recognizer for ii-rec-n)")
        parser.add_argument("--detector-ckpt", default=None, help="Detector checkpoint for ii-rec-n")
        parser.add_argument("--manifest", required=True)
        parser.add_argument("--setting", choices=[s.value for s in Setting], required=True)
        parser.add_argument("--split", default="test", help="Split tag to evaluate ('' for all entries)")
        parser.add_argument("--out", required=True, help="Report directory")
        parser.add_argument("--batch", type=int, default=8)
        parser.add_argument("--workers", type=int, default=0)

    def execute(self, args: argparse.Namespace) -> str:
        setting = Setting.parse(args.setting)
        manifest = CorpusManifest.load(args.manifest)

        if setting is Setting.II_REC_N:
            if not args.detector_ckpt:
                raise UsageError("ii-rec-n needs --detector-ckpt in addition to --ckpt")
            report = evaluate_two_stage(args.detector_ckpt, args.ckpt, manifest,
                                        args.split or None, args.batch, args.workers)
        else:
            model, config, _ = load_checkpoint(args.ckpt)
            view = manifest
            if manifest.class_names != list(config.class_names):
                view = derive_setting_view(manifest, setting)
            entries = view.split(args.split) if args.split else view.entries
            report, _ = evaluate_model(model, config, view, setting, entries, args.batch, args.workers)

        path = report.write(args.out)
        return f"📊 {report.summary_line()}\n   report: {path}"
