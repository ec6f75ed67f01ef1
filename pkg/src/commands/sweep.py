#!/usr/bin/env python3
"""
Sweep command: one seeded training run per value of lambda or alpha, summarized
in a tab-separated table.
"""

import argparse
import logging
from pathlib import Path
from typing import List

from core.errors import UsageError
from core.types import Setting, Strategy
from corpus.manifest import CorpusManifest
from training.settings import SettingSpec
from training.trainer import train
from .base_command import BaseCommand
from .options import add_training_arguments, pipeline_from_args, schedule_from_args

logger = logging.getLogger("patchlabel_commands")

SWEEP_FILE = "sweep.tsv"
SWEEP_COLUMNS = ("auc", "p_at_r90", "binary_f1", "top1", "macro_f1", "mean_abs_s_distressed")


def parse_values(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"Cannot parse sweep values '{text}'")
    if not values:
        raise UsageError("--values needs at least one value")
    return values


def _cell(value) -> str:
    return "" if value is None else repr(float(value))


class SweepCommand(BaseCommand):
    """Train once per lambda or alpha value with the same seed"""

    def __init__(self):
        super().__init__(name="sweep", description="Sensitivity sweep over lambda or alpha")

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--param", choices=("lambda", "alpha"), required=True)
        parser.add_argument("--values", required=True, help="Comma-separated values, e.g. 0,1e-4,1e-3,1e-2")
        add_training_arguments(parser)

    def execute(self, args: argparse.Namespace) -> str:
        values = parse_values(args.values)
        if args.param == "alpha":
            if args.alpha is not None:
                raise UsageError("Use --values instead of --alpha when sweeping alpha")
            if args.strategy not in (None, Strategy.SPARSE_SAMPLING.value):
                raise UsageError("An alpha sweep needs --strategy ss")
            if any(not 0.0 < v <= 1.0 for v in values):
                raise UsageError(f"alpha values must be in (0, 1]: {values}")
            args.strategy = Strategy.SPARSE_SAMPLING.value
        elif any(v < 0 for v in values):
            raise UsageError(f"lambda values cannot be negative: {values}")

        base = pipeline_from_args(args)
        manifest = CorpusManifest.load(args.manifest)
        setting = SettingSpec.from_manifest(manifest, Setting.parse(args.setting))
        out = Path(args.out)

        rows = ["\t".join(("value",) + SWEEP_COLUMNS)]
        for value in values:
            pipeline = base.replace(**{args.param: value})
            logger.info("🔁 Sweep %s=%g", args.param, value)
            result = train(setting, pipeline, schedule_from_args(args), out / f"{args.param}_{value:g}")
            metrics = result.report.metrics if result.report is not None else {}
            rows.append("\t".join([repr(value)] + [_cell(metrics.get(c)) for c in SWEEP_COLUMNS]))

        out.mkdir(parents=True, exist_ok=True)
        (out / SWEEP_FILE).write_text("\n".join(rows) + "\n", encoding="utf-8")
        return "\n".join([f"✅ Sweep over {args.param} written to {out / SWEEP_FILE}"] + rows)
