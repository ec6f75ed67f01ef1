#!/usr/bin/env python3
"""
Train command: one training run into a run directory
"""

import argparse
import logging

from core.types import Setting
from corpus.manifest import CorpusManifest
from training.settings import SettingSpec
from training.trainer import train
from .base_command import BaseCommand
from .options import add_training_arguments, pipeline_from_args, schedule_from_args

logger = logging.getLogger("patchlabel_commands")


class TrainCommand(BaseCommand):
    """Train a detector or recognizer on a manifest"""

    def __init__(self):
        super().__init__(
            name="train",
            description="Train a patch label model for a setting (i-det, i-rec, ii-rec-i)",
        )

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_training_arguments(parser)

    def execute(self, args: argparse.Namespace) -> str:
        pipeline = pipeline_from_args(args)
        schedule = schedule_from_args(args)
        manifest = CorpusManifest.load(args.manifest)
        setting = SettingSpec.from_manifest(manifest, Setting.parse(args.setting))
        result = train(setting, pipeline, schedule, args.out)

        lines = [
            f"✅ Run directory: {result.run_dir}",
            f"   best checkpoint: {result.best_checkpoint}",
            f"   epochs: {len(result.records)}, final loss {result.records[-1].total:.4f}",
        ]
        if result.train_report is not None:
            lines.append(f"   train: {result.train_report.summary_line()}")
        if result.report is not None:
            lines.append(f"   test:  {result.report.summary_line()}")
        return "\n".join(lines)
