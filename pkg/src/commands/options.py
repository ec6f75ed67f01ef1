#!/usr/bin/env python3
"""
Shared command-line options for commands that train models.
"""

import argparse
from typing import Optional

from core.config import BACKBONE_CHOICES, OPTIMIZER_CHOICES, BackboneSpec, PipelineConfig, ScheduleSpec
from core.errors import UsageError
from core.types import Strategy
from patching import PyramidSpec

TRAIN_SETTINGS = ("i-det", "i-rec", "ii-rec-i")


def add_training_arguments(parser: argparse.ArgumentParser, with_setting: bool = True) -> None:
    if with_setting:
        parser.add_argument("--setting", choices=TRAIN_SETTINGS, default="i-det")
    parser.add_argument("--manifest", required=True, help="Corpus manifest")
    parser.add_argument("--out", required=True, help="Run directory")
    parser.add_argument("--strategy", choices=[s.value for s in Strategy], default=None)
    parser.add_argument("--alpha", type=float, default=None, help="Sparse sample ratio (ss only)")
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="Sparsity weight (default 1e-3)")
    parser.add_argument("--backbone", choices=BACKBONE_CHOICES, default=None)
    parser.add_argument("--pretrained", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None, help="Base learning rate (default 8e-4)")
    parser.add_argument("--hold-fraction", type=float, default=None)
    parser.add_argument("--optimizer", choices=OPTIMIZER_CHOICES, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None, help="Data loading workers (non-deterministic runs)")
    parser.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--augment", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--validation-fraction", type=float, default=None)
    parser.add_argument("--device", default=None)
    parser.add_argument("--dropout", type=float, default=None)
    parser.add_argument("--channels", type=int, choices=(1, 3), default=None)
    parser.add_argument("--pyramid", default=None, help="Layer resolutions, e.g. 1200x900,600x600,300x300")
    parser.add_argument("--window", type=int, default=None)
    parser.add_argument("--stride", type=int, default=None)


def check_flag_combinations(args: argparse.Namespace) -> None:
    """Raise UsageError for out-of-range values or flags the strategy cannot use"""
    strategy = args.strategy
    if args.alpha is not None:
        if not 0.0 < args.alpha <= 1.0:
            raise UsageError(f"--alpha must be in (0, 1], got {args.alpha}")
        if strategy is not None and strategy != Strategy.SPARSE_SAMPLING.value:
            raise UsageError(f"--alpha only applies to --strategy ss, not {strategy}")
    if args.lam is not None and args.lam < 0:
        raise UsageError(f"--lambda cannot be negative, got {args.lam}")
    for flag in ("epochs", "batch"):
        value = getattr(args, flag)
        if value is not None and value <= 0:
            raise UsageError(f"--{flag} must be positive, got {value}")
    if args.lr is not None and args.lr <= 0:
        raise UsageError(f"--lr must be positive, got {args.lr}")


def pipeline_from_args(args: argparse.Namespace) -> PipelineConfig:
    check_flag_combinations(args)
    strategy = args.strategy
    if strategy is None and args.alpha is not None:
        strategy = Strategy.SPARSE_SAMPLING.value
    backbone: Optional[BackboneSpec] = None
    if args.backbone is not None or args.pretrained is not None:
        name = args.backbone or "tiny"
        pretrained = args.pretrained if args.pretrained is not None else name == "effnet-b3"
        backbone = BackboneSpec(name=name, pretrained=pretrained)
    pyramid = None
    if args.pyramid is not None or args.window is not None or args.stride is not None:
        defaults = PyramidSpec()
        window = args.window or defaults.window_size
        pyramid = PyramidSpec(
            layer_resolutions=PyramidSpec.parse_layers(args.pyramid) if args.pyramid else defaults.layer_resolutions,
            window_size=window,
            stride=args.stride or window,
        )
    return PipelineConfig(
        strategy=strategy,
        alpha=args.alpha,
        lam=args.lam,
        backbone=backbone,
        pyramid=pyramid,
        dropout=args.dropout,
        channels=args.channels,
    )


def schedule_from_args(args: argparse.Namespace) -> ScheduleSpec:
    return ScheduleSpec(
        base_lr=args.lr,
        hold_fraction=args.hold_fraction,
        total_epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
        optimizer=args.optimizer,
        num_workers=args.workers,
        deterministic=args.deterministic,
        validation_fraction=args.validation_fraction,
        augment=args.augment,
        device=args.device,
        backbone=args.backbone,
    )
