#!/usr/bin/env python3
"""
Pipeline Configuration Module

Handles patch collection, model and optimisation settings. Keyword arguments win
over ``PATCHLABEL_*`` environment variables, which win over built-in defaults.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

from dotenv import load_dotenv

from patching.extractor import plan_boxes
from patching.geometry import DEFAULT_PYRAMID, PyramidSpec
from patching.sparse_sampler import DEFAULT_MAX_COMBINATIONS
from .errors import ConfigError
from .types import Strategy

logger = logging.getLogger("patchlabel_config")

BACKBONE_CHOICES = ("tiny", "effnet-b3")
OPTIMIZER_CHOICES = ("adam", "radam", "lookahead-radam")
DEFAULT_EPOCHS = {"tiny": 30, "effnet-b3": 60}


def _env(key: str, default: str) -> str:
    return os.getenv(f"PATCHLABEL_{key}", default)


def _env_bool(key: str, default: str) -> bool:
    return _env(key, default).lower() == 'true'


@dataclass(frozen=True)
class BackboneSpec:
    """Which per-patch network to build and how"""
    name: str = "tiny"
    pretrained: bool = False
    feature_config: Tuple[Tuple[str, Any], ...] = field(default_factory=tuple)

    def options(self) -> Dict[str, Any]:
        return dict(self.feature_config)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "pretrained": self.pretrained, "feature_config": self.options()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BackboneSpec":
        return cls(
            name=data["name"],
            pretrained=bool(data.get("pretrained", False)),
            feature_config=tuple(sorted(data.get("feature_config", {}).items())),
        )


class PipelineConfig:
    """Patch strategy, sparsity weight, category layout and model settings"""

    def __init__(self,
                 strategy: Optional[str] = None,
                 alpha: Optional[float] = None,
                 lam: Optional[float] = None,
                 num_classes: Optional[int] = None,
                 class_names: Optional[Sequence[str]] = None,
                 normal_class: Optional[int] = -1,
                 backbone: Optional[BackboneSpec] = None,
                 pyramid: Optional[PyramidSpec] = None,
                 dropout: Optional[float] = None,
                 channels: Optional[int] = None,
                 max_combinations: Optional[int] = None,
                 load_dotenv_file: bool = True):
        """
        Initialize pipeline configuration.

        Args:
            strategy: Patch collection strategy (sw, ip, ss)
            alpha: Sparse sample ratio, only meaningful for ss
            lam: Weight of the patch label sparsity constraint
            num_classes: Category count C (defaults to len(class_names))
            class_names: Category names in index order
            normal_class: Index of the normal category, None when there is none;
                -1 (default) means "normal" in class_names if present, else 0
            backbone: Per-patch network spec
            pyramid: Layer resolutions, window and stride
            dropout: Dropout rate of the decision network
            channels: Image channels fed to the backbone (1 gray, 3 colour)
            max_combinations: Enumeration cap for sparse sampling
            load_dotenv_file: Whether to load a .env file first
        """
        if load_dotenv_file:
            load_dotenv()

        self.strategy = Strategy.parse(strategy or _env('STRATEGY', 'ip'))
        self.alpha = float(alpha if alpha is not None else _env('ALPHA', '0.25' if self.strategy is Strategy.SPARSE_SAMPLING else '1.0'))
        self.lam = float(lam if lam is not None else _env('LAMBDA', '1e-3'))

        self.class_names = tuple(class_names) if class_names else None
        if num_classes is None:
            num_classes = len(self.class_names) if self.class_names else int(_env('NUM_CLASSES', '2'))
        self.num_classes = int(num_classes)
        if self.class_names is None:
            self.class_names = tuple(f"class_{i}" for i in range(self.num_classes))

        if normal_class == -1:
            normal_class = self.class_names.index("normal") if "normal" in self.class_names else 0
        self.normal_class = normal_class

        self.backbone = backbone or BackboneSpec(
            name=_env('BACKBONE', 'tiny'),
            pretrained=_env_bool('PRETRAINED', 'true' if _env('BACKBONE', 'tiny') == 'effnet-b3' else 'false'),
        )
        if pyramid is None:
            layers = _env('PYRAMID_LAYERS', '')
            pyramid = DEFAULT_PYRAMID if not layers else PyramidSpec(
                layer_resolutions=PyramidSpec.parse_layers(layers),
                window_size=int(_env('WINDOW_SIZE', '300')),
                stride=int(_env('STRIDE', _env('WINDOW_SIZE', '300'))),
            )
        self.pyramid = pyramid
        self.dropout = float(dropout if dropout is not None else _env('DROPOUT', '0.5'))
        self.channels = int(channels if channels is not None else _env('CHANNELS', '1'))
        self.max_combinations = int(
            max_combinations if max_combinations is not None
            else _env('MAX_COMBINATIONS', str(DEFAULT_MAX_COMBINATIONS))
        )

    @property
    def effective_alpha(self) -> float:
        """alpha only shapes geometry under sparse sampling"""
        return self.alpha if self.strategy is Strategy.SPARSE_SAMPLING else 1.0

    @property
    def patch_count(self) -> int:
        """m for this configuration"""
        return len(plan_boxes(self.strategy, self.pyramid, self.effective_alpha, self.max_combinations))

    def validate_config(self) -> bool:
        """Validate configuration; logs and raises ConfigError on failure"""
        try:
            if not 0.0 < self.alpha <= 1.0:
                raise ValueError(f"alpha must be in (0, 1]: {self.alpha}")
            if self.lam < 0:
                raise ValueError(f"lambda cannot be negative: {self.lam}")
            if self.num_classes < 2:
                raise ValueError(f"At least two categories are needed: {self.num_classes}")
            if len(self.class_names) != self.num_classes:
                raise ValueError(f"{len(self.class_names)} class names for {self.num_classes} classes")
            if self.normal_class is not None and not 0 <= self.normal_class < self.num_classes:
                raise ValueError(f"Normal class index out of range: {self.normal_class}")
            if self.backbone.name not in BACKBONE_CHOICES:
                raise ValueError(f"Unknown backbone '{self.backbone.name}'")
            if not 0.0 <= self.dropout < 1.0:
                raise ValueError(f"Dropout rate must be in [0, 1): {self.dropout}")
            if self.channels not in (1, 3):
                raise ValueError(f"Channels must be 1 or 3: {self.channels}")
            if self.max_combinations <= 0:
                raise ValueError(f"Enumeration cap must be positive: {self.max_combinations}")
            self.pyramid.validate()
            return True
        except ConfigError:
            raise
        except ValueError as e:
            logger.error("Configuration validation failed: %s", e)
            raise ConfigError(str(e)) from e

    def is_compatible(self, other: "PipelineConfig") -> bool:
        """Same geometry and category layout"""
        return (
            self.strategy is other.strategy
            and abs(self.effective_alpha - other.effective_alpha) < 1e-12
            and self.num_classes == other.num_classes
            and self.pyramid == other.pyramid
            and self.channels == other.channels
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'strategy': self.strategy.value,
            'alpha': self.alpha,
            'lambda': self.lam,
            'num_classes': self.num_classes,
            'class_names': list(self.class_names),
            'normal_class': self.normal_class,
            'backbone': self.backbone.to_dict(),
            'pyramid': {
                'layer_resolutions': [list(dims) for dims in self.pyramid.layer_resolutions],
                'window_size': self.pyramid.window_size,
                'stride': self.pyramid.stride,
            },
            'dropout': self.dropout,
            'channels': self.channels,
            'max_combinations': self.max_combinations,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        pyramid = data['pyramid']
        return cls(
            strategy=data['strategy'],
            alpha=data['alpha'],
            lam=data['lambda'],
            num_classes=data['num_classes'],
            class_names=data['class_names'],
            normal_class=data['normal_class'],
            backbone=BackboneSpec.from_dict(data['backbone']),
            pyramid=PyramidSpec(
                layer_resolutions=tuple(tuple(d) for d in pyramid['layer_resolutions']),
                window_size=pyramid['window_size'],
                stride=pyramid['stride'],
            ),
            dropout=data['dropout'],
            channels=data['channels'],
            max_combinations=data['max_combinations'],
            load_dotenv_file=False,
        )

    def replace(self, **changes) -> "PipelineConfig":
        data = self.to_dict()
        data.update(changes)
        return PipelineConfig.from_dict(data)

    def get_config_summary(self) -> Dict[str, Any]:
        """Compact summary for start-up logging"""
        return {
            'strategy': self.strategy.value,
            'alpha': self.effective_alpha,
            'lambda': self.lam,
            'classes': self.num_classes,
            'normal_class': self.normal_class,
            'backbone': self.backbone.name,
            'pretrained': self.backbone.pretrained,
            'pyramid': self.pyramid.to_text(),
        }

    def __repr__(self) -> str:
        return (
            f"PipelineConfig(strategy='{self.strategy.value}', alpha={self.alpha}, "
            f"lam={self.lam}, num_classes={self.num_classes}, backbone='{self.backbone.name}')"
        )


class ScheduleSpec:
    """Optimisation schedule and run reproducibility settings"""

    def __init__(self,
                 base_lr: Optional[float] = None,
                 hold_fraction: Optional[float] = None,
                 total_epochs: Optional[int] = None,
                 batch_size: Optional[int] = None,
                 seed: Optional[int] = None,
                 optimizer: Optional[str] = None,
                 num_workers: Optional[int] = None,
                 deterministic: Optional[bool] = None,
                 validation_fraction: Optional[float] = None,
                 augment: Optional[bool] = None,
                 device: Optional[str] = None,
                 backbone: Optional[str] = None,
                 load_dotenv_file: bool = True):
        """backbone only picks the default epoch count (30 tiny, 60 effnet-b3)"""
        if load_dotenv_file:
            load_dotenv()

        self.base_lr = float(base_lr if base_lr is not None else _env('LR', '8e-4'))
        self.hold_fraction = float(hold_fraction if hold_fraction is not None else _env('HOLD_FRACTION', '0.25'))
        default_epochs = DEFAULT_EPOCHS.get(backbone or _env('BACKBONE', 'tiny'), DEFAULT_EPOCHS["tiny"])
        self.total_epochs = int(total_epochs if total_epochs is not None else _env('EPOCHS', str(default_epochs)))
        self.batch_size = int(batch_size if batch_size is not None else _env('BATCH_SIZE', '8'))
        self.seed = int(seed if seed is not None else _env('SEED', '0'))
        self.optimizer = optimizer or _env('OPTIMIZER', 'adam')
        self.num_workers = int(num_workers if num_workers is not None else _env('NUM_WORKERS', '0'))
        self.deterministic = deterministic if deterministic is not None else _env_bool('DETERMINISTIC', 'true')
        self.validation_fraction = float(
            validation_fraction if validation_fraction is not None else _env('VALIDATION_FRACTION', '0.1')
        )
        self.augment = augment if augment is not None else _env_bool('AUGMENT', 'true')
        self.device = device or _env('DEVICE', 'cpu')

    @property
    def effective_workers(self) -> int:
        """Deterministic mode forces single-worker loading"""
        return 0 if self.deterministic else self.num_workers

    def validate_config(self) -> bool:
        try:
            if self.base_lr <= 0:
                raise ValueError(f"Learning rate must be positive: {self.base_lr}")
            if not 0.0 <= self.hold_fraction < 1.0:
                raise ValueError(f"Hold fraction must be in [0, 1): {self.hold_fraction}")
            if self.total_epochs <= 0:
                raise ValueError(f"Epoch count must be positive: {self.total_epochs}")
            if self.batch_size <= 0:
                raise ValueError(f"Batch size must be positive: {self.batch_size}")
            if self.optimizer not in OPTIMIZER_CHOICES:
                raise ValueError(f"Unknown optimizer '{self.optimizer}'")
            if self.num_workers < 0:
                raise ValueError(f"Worker count cannot be negative: {self.num_workers}")
            if not 0.0 <= self.validation_fraction < 1.0:
                raise ValueError(f"Validation fraction must be in [0, 1): {self.validation_fraction}")
            return True
        except ValueError as e:
            logger.error("Schedule validation failed: %s", e)
            raise ConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            'base_lr': self.base_lr,
            'hold_fraction': self.hold_fraction,
            'total_epochs': self.total_epochs,
            'batch_size': self.batch_size,
            'seed': self.seed,
            'optimizer': self.optimizer,
            'num_workers': self.num_workers,
            'deterministic': self.deterministic,
            'validation_fraction': self.validation_fraction,
            'augment': self.augment,
            'device': self.device,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScheduleSpec":
        return cls(load_dotenv_file=False, **data)


def canonical_text(data: Dict[str, Any]) -> str:
    """Stable-key JSON used for config echoes and reports"""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
