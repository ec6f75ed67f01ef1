#!/usr/bin/env python3
"""
Evaluation reports: detection metrics (AUC, P@R=90%/95%, binary F1 at 0.5) when a
normal class is present, recognition metrics (top-1, macro F1) always, the
per-class breakdown and the ROC point list.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from core.config import canonical_text
from core.errors import UndefinedMetricError
from core.types import Setting
from .metrics import (
    auc,
    binary_counts,
    binary_f1,
    macro_f1,
    per_class_counts,
    precision_at_recall,
    roc_points,
    scored_samples,
    top1_accuracy,
)

logger = logging.getLogger("patchlabel_report")

PathLike = Union[str, os.PathLike]

REPORT_FILE = "report.json"
ROC_FILE = "roc.tsv"
DETECTION_THRESHOLD = 0.5


@dataclass
class EvaluationReport:
    setting: str
    num_samples: int
    class_names: List[str]
    metrics: Dict[str, Optional[float]] = field(default_factory=dict)
    per_class: List[Dict[str, Any]] = field(default_factory=list)
    roc: List[List[float]] = field(default_factory=list)

    def get(self, name: str) -> Optional[float]:
        return self.metrics.get(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'setting': self.setting,
            'num_samples': self.num_samples,
            'class_names': list(self.class_names),
            'metrics': dict(self.metrics),
            'per_class': list(self.per_class),
        }

    def to_text(self) -> str:
        return canonical_text(self.to_dict())

    def roc_text(self) -> str:
        lines = ["threshold\tfpr\ttpr\tprecision"]
        lines.extend("\t".join(repr(float(v)) for v in point) for point in self.roc)
        return "\n".join(lines) + "\n"

    def write(self, out_dir: PathLike) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / REPORT_FILE
        path.write_text(self.to_text(), encoding="utf-8")
        if self.roc:
            (out_dir / ROC_FILE).write_text(self.roc_text(), encoding="utf-8")
        logger.info("📊 Report written: %s", path)
        return path

    def summary_line(self) -> str:
        parts = [f"{name}={value:.4f}" for name, value in sorted(self.metrics.items()) if value is not None]
        return f"{self.setting} n={self.num_samples} " + " ".join(parts)


def _defined(compute, name: str) -> Optional[float]:
    try:
        value = float(compute())
    except UndefinedMetricError as e:
        logger.warning("⚠️ %s undefined: %s", name, e)
        return None
    return value if math.isfinite(value) else None


def build_report(predicted: Sequence[int], actual: Sequence[int], setting: Union[Setting, str],
                 class_names: Sequence[str], normal_class: Optional[int] = None,
                 scores: Optional[Sequence[float]] = None,
                 extras: Optional[Dict[str, float]] = None) -> EvaluationReport:
    """Report for aligned predicted/actual labels and, for detection, distressed scores"""
    setting = Setting.parse(setting)
    predicted = np.asarray(predicted, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    num_classes = len(class_names)
    report = EvaluationReport(setting.value, int(len(actual)), list(class_names))

    counts = per_class_counts(predicted, actual, num_classes)
    report.metrics['top1'] = _defined(lambda: top1_accuracy(predicted, actual), 'top1')
    report.metrics['macro_f1'] = _defined(lambda: macro_f1(counts), 'macro_f1')
    for name, c in zip(class_names, counts):
        report.per_class.append({
            'class': name, 'tp': c.tp, 'fp': c.fp, 'fn': c.fn, 'tn': c.tn,
            'support': c.tp + c.fn, 'f1': binary_f1(c),
        })

    if normal_class is not None and scores is not None:
        samples = scored_samples(scores, actual != normal_class)
        report.metrics['auc'] = _defined(lambda: auc(samples), 'auc')
        report.metrics['p_at_r90'] = _defined(lambda: precision_at_recall(samples, 0.90), 'p_at_r90')
        report.metrics['p_at_r95'] = _defined(lambda: precision_at_recall(samples, 0.95), 'p_at_r95')
        report.metrics['binary_f1'] = binary_f1(binary_counts(samples, DETECTION_THRESHOLD))
        try:
            report.roc = [list(point) for point in roc_points(samples)]
        except UndefinedMetricError:
            report.roc = []

    for name, value in (extras or {}).items():
        report.metrics[name] = value
    logger.info("%s", report.summary_line())
    return report
