"""
Evaluation package: rank-based AUC, precision at recall, F1 scores and reports
"""

from .metrics import (
    ConfusionCounts,
    ScoredSample,
    auc,
    binary_f1,
    macro_f1,
    operating_threshold,
    per_class_counts,
    precision_at_recall,
    roc_points,
    scored_samples,
)
from .report import EvaluationReport, build_report

__all__ = [
    'ConfusionCounts',
    'ScoredSample',
    'auc',
    'binary_f1',
    'macro_f1',
    'operating_threshold',
    'per_class_counts',
    'precision_at_recall',
    'roc_points',
    'scored_samples',
    'EvaluationReport',
    'build_report',
]
