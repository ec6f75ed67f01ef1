#!/usr/bin/env python3
"""
Training Module

End-to-end optimisation of the patch label model on a setting's train split.

Run directory layout:
    config.json     canonical echo of setting, pipeline and schedule
    metrics.log     one line per epoch: epoch, lr, L_c, L_s, total
    last.pt         checkpoint after the latest epoch
    best.pt         checkpoint with the best validation score
    report.json     test-split evaluation of best.pt (plus roc.tsv for detection)
"""

import logging
import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch.utils.data import DataLoader

from core.config import PipelineConfig, ScheduleSpec, canonical_text
from core.errors import ConfigError, DivergenceError
from corpus.datasets import PatchDataset
from corpus.ingest import assign_splits
from corpus.manifest import ManifestEntry
from evaluation.report import EvaluationReport
from network.checkpoint import load_checkpoint, save_checkpoint
from network.model import PatchLabelModel, build_model, parameter_count
from .augmentation import SeededAugmentation
from .metrics_log import EpochRecord, TrainingMetrics
from .objectives import total_loss
from .optim import build_optimizer
from .protocols import evaluate_model
from .schedule import build_scheduler
from .settings import SettingSpec

logger = logging.getLogger("patchlabel_trainer")

PathLike = Union[str, os.PathLike]

CONFIG_FILE = "config.json"
METRICS_FILE = "metrics.log"
LAST_CHECKPOINT = "last.pt"
BEST_CHECKPOINT = "best.pt"


def seed_everything(seed: int, deterministic: bool = True) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.cuda.manual_seed_all(seed)
    torch.backends.cudnn.deterministic = deterministic
    torch.backends.cudnn.benchmark = not deterministic
    if deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)


def holdout_split(entries: List[ManifestEntry], fraction: float,
                  seed: int) -> Tuple[List[ManifestEntry], List[ManifestEntry]]:
    """Per-class seeded holdout; returns (fit, validation)"""
    if fraction <= 0:
        return list(entries), []
    rng = np.random.default_rng([seed, 1])
    fit, validation = [], []
    for class_name in sorted({e.class_name for e in entries}):
        own = [e for e in entries if e.class_name == class_name]
        for entry, tag in assign_splits(own, {"fit": 1.0 - fraction, "val": fraction}, rng):
            (validation if tag == "val" else fit).append(entry)
    if not fit:
        return list(entries), []
    return fit, validation


def selection_score(report: EvaluationReport) -> float:
    """Validation AUC when defined, else macro F1, else top-1"""
    for name in ('auc', 'macro_f1', 'top1'):
        value = report.get(name)
        if value is not None:
            return value
    return -math.inf


@dataclass
class TrainingResult:
    run_dir: Path
    best_checkpoint: Path
    last_checkpoint: Path
    records: List[EpochRecord]
    report: Optional[EvaluationReport] = None
    train_report: Optional[EvaluationReport] = None
    parameters: Dict[str, int] = field(default_factory=dict)


class Trainer:
    """One training run for a setting, pipeline configuration and schedule"""

    def __init__(self, setting: SettingSpec, pipeline: PipelineConfig, schedule: ScheduleSpec,
                 run_dir: PathLike, evaluate_train: bool = True):
        setting.validate()
        self.setting = setting
        self.pipeline = pipeline.replace(
            num_classes=setting.num_classes,
            class_names=setting.class_names,
            normal_class=setting.normal_class,
        )
        self.pipeline.validate_config()
        schedule.validate_config()
        self.schedule = schedule
        self.run_dir = Path(run_dir)
        self.evaluate_train = evaluate_train

        self.train_entries = setting.manifest.split("train")
        if not self.train_entries:
            raise ConfigError("The train split is empty")
        self.test_entries = setting.manifest.split("test")
        self.fit_entries, self.validation_entries = holdout_split(
            self.train_entries, schedule.validation_fraction, schedule.seed
        )
        self.device = torch.device(schedule.device)

    def _write_config_echo(self) -> None:
        echo = {
            'setting': self.setting.setting.value,
            'manifest_checksum': self.setting.manifest.checksum,
            'pipeline': self.pipeline.to_dict(),
            'schedule': self.schedule.to_dict(),
            'train_entries': len(self.fit_entries),
            'validation_entries': len(self.validation_entries),
            'test_entries': len(self.test_entries),
        }
        (self.run_dir / CONFIG_FILE).write_text(canonical_text(echo), encoding="utf-8")

    def _loader(self, augmentation: Optional[SeededAugmentation]) -> DataLoader:
        dataset = PatchDataset(self.setting.manifest, self.pipeline, self.fit_entries, augmentation)
        generator = torch.Generator()
        generator.manual_seed(self.schedule.seed)
        return DataLoader(
            dataset,
            batch_size=self.schedule.batch_size,
            shuffle=True,
            generator=generator,
            num_workers=self.schedule.effective_workers,
        )

    def _evaluate(self, model: PatchLabelModel, entries: List[ManifestEntry]) -> EvaluationReport:
        report, _ = evaluate_model(
            model, self.pipeline, self.setting.manifest, self.setting.setting, entries,
            self.schedule.batch_size, self.schedule.effective_workers,
        )
        return report

    def run(self) -> TrainingResult:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        seed_everything(self.schedule.seed, self.schedule.deterministic)
        self._write_config_echo()

        model = build_model(self.pipeline).to(self.device)
        parameters = parameter_count(model)
        logger.info("🚀 Training %s: %s", self.setting.setting.value, self.pipeline.get_config_summary())
        logger.info("Parameters: plin=%d cdn=%d total=%d (m=%d)",
                    parameters['plin'], parameters['cdn'], parameters['total'], self.pipeline.patch_count)
        logger.info("Entries: fit=%d validation=%d test=%d",
                    len(self.fit_entries), len(self.validation_entries), len(self.test_entries))

        augmentation = SeededAugmentation(self.schedule.seed) if self.schedule.augment else None
        loader = self._loader(augmentation)
        optimizer = build_optimizer(model.parameters(), self.schedule)
        total_steps = self.schedule.total_epochs * len(loader)
        scheduler = build_scheduler(optimizer, total_steps, self.schedule)
        metrics = TrainingMetrics(self.run_dir / METRICS_FILE)

        last_path = self.run_dir / LAST_CHECKPOINT
        best_path = self.run_dir / BEST_CHECKPOINT
        last_good: Optional[Path] = None
        best_score = -math.inf

        for epoch in range(self.schedule.total_epochs):
            metrics.start_epoch()
            if augmentation is not None:
                augmentation.set_epoch(epoch)
            epoch_lr = scheduler.get_last_lr()[0]
            sums = np.zeros(3)
            model.train()
            for patches, labels, _ in loader:
                patches = patches.to(self.device)
                one_hot = F.one_hot(labels, self.pipeline.num_classes).to(self.device, patches.dtype)
                probabilities, confidences = model(patches)
                breakdown = total_loss(probabilities, one_hot, confidences, self.pipeline.lam,
                                       self.pipeline.normal_class)
                if not torch.isfinite(breakdown.total):
                    raise DivergenceError(
                        f"Non-finite loss at epoch {epoch}: {breakdown.as_floats()}",
                        str(last_good) if last_good else None,
                    )
                optimizer.zero_grad()
                breakdown.total.backward()
                optimizer.step()
                scheduler.step()
                values = breakdown.as_floats()
                sums += (values['classification'], values['sparsity'], values['total'])

            means = sums / max(len(loader), 1)
            metrics.record_epoch(EpochRecord(epoch, epoch_lr, *means.tolist()))
            save_checkpoint(last_path, model, self.pipeline, {'epoch': epoch, 'setting': self.setting.setting.value})
            last_good = last_path

            if self.validation_entries:
                score = selection_score(self._evaluate(model, self.validation_entries))
            else:
                score = -float(means[2])
            if score > best_score:
                best_score = score
                save_checkpoint(best_path, model, self.pipeline,
                                {'epoch': epoch, 'setting': self.setting.setting.value, 'selection_score': score})
                logger.info("⭐ New best checkpoint at epoch %d (score %.4f)", epoch, score)

        best_model, _, _ = load_checkpoint(best_path, expected=self.pipeline, map_location=str(self.device))
        result = TrainingResult(self.run_dir, best_path, last_path, metrics.records, parameters=parameters)
        if self.evaluate_train:
            result.train_report = self._evaluate(best_model, self.train_entries)
            result.train_report.write(self.run_dir / "train")
        if self.test_entries:
            result.report = self._evaluate(best_model, self.test_entries)
            result.report.write(self.run_dir)
        logger.info("✅ Training finished: %s", metrics.get_summary())
        return result


def train(setting: SettingSpec, pipeline: PipelineConfig, schedule: ScheduleSpec,
          run_dir: PathLike, evaluate_train: bool = True) -> TrainingResult:
    return Trainer(setting, pipeline, schedule, run_dir, evaluate_train).run()
