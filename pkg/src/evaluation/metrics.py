#!/usr/bin/env python3
"""
Evaluation Metrics Module

Rank-based AUC, precision at a target recall, binary and macro F1.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from core.errors import UndefinedMetricError

RECALL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ScoredSample:
    score: float
    positive: bool

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise UndefinedMetricError(f"Score must be finite, got {self.score}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError(f"Confusion counts cannot be negative: {self}")

    @property
    def precision(self) -> float:
        predicted = self.tp + self.fp
        return self.tp / predicted if predicted else 0.0

    @property
    def recall(self) -> float:
        actual = self.tp + self.fn
        return self.tp / actual if actual else 0.0


def _arrays(samples: Sequence[ScoredSample]) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.array([s.score for s in samples], dtype=np.float64)
    positives = np.array([s.positive for s in samples], dtype=bool)
    return scores, positives


def scored_samples(scores: Sequence[float], positives: Sequence[bool]) -> List[ScoredSample]:
    return [ScoredSample(float(s), bool(p)) for s, p in zip(scores, positives)]


def auc(samples: Sequence[ScoredSample]) -> float:
    """(sum of positive midranks - Np(Np+1)/2) / (Np * Nn)"""
    scores, positives = _arrays(samples)
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(f"AUC needs both classes (positives={n_pos}, negatives={n_neg})")
    ranks = rankdata(scores, method="average")
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(samples: Sequence[ScoredSample]) -> List[Tuple[float, float, float, float]]:
    """(threshold, false positive rate, true positive rate, precision) per distinct score, descending.

    A sample counts as positive when its score is >= the threshold. The first
    point is the empty operating point at threshold +inf.
    """
    scores, positives = _arrays(samples)
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0:
        raise UndefinedMetricError("ROC needs at least one positive sample")
    points = [(math.inf, 0.0, 0.0, 1.0)]
    order = np.argsort(-scores, kind="stable")
    sorted_scores, sorted_pos = scores[order], positives[order]
    tp_cumulative = np.cumsum(sorted_pos)
    fp_cumulative = np.cumsum(~sorted_pos)
    # last index of each run of equal scores
    boundaries = np.flatnonzero(np.append(np.diff(sorted_scores) != 0, True))
    for index in boundaries:
        tp, fp = int(tp_cumulative[index]), int(fp_cumulative[index])
        points.append((
            float(sorted_scores[index]),
            fp / n_neg if n_neg else 0.0,
            tp / n_pos,
            tp / (tp + fp),
        ))
    return points


def operating_threshold(samples: Sequence[ScoredSample], target_recall: float) -> Tuple[float, float]:
    """(threshold, precision) of the highest threshold whose recall reaches target_recall"""
    if not 0.0 < target_recall <= 1.0:
        raise ValueError(f"Target recall must be in (0, 1]: {target_recall}")
    for threshold, _, recall, precision in roc_points(samples)[1:]:
        if recall >= target_recall - RECALL_TOLERANCE:
            return threshold, precision
    raise UndefinedMetricError(f"Recall {target_recall} is unreachable")


def precision_at_recall(samples: Sequence[ScoredSample], target_recall: float) -> float:
    """Precision at the operating point reaching target_recall.

    Not interpolated, so not monotone in target_recall; only the chosen threshold is.
    """
    return operating_threshold(samples, target_recall)[1]


def binary_counts(samples: Sequence[ScoredSample], threshold: float = 0.5) -> ConfusionCounts:
    scores, positives = _arrays(samples)
    predicted = scores >= threshold
    return ConfusionCounts(
        tp=int((predicted & positives).sum()),
        fp=int((predicted & ~positives).sum()),
        fn=int((~predicted & positives).sum()),
        tn=int((~predicted & ~positives).sum()),
    )


def binary_f1(counts: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall; 0 when either is undefined or both are 0"""
    if counts.tp + counts.fp == 0 or counts.tp + counts.fn == 0:
        return 0.0
    precision, recall = counts.precision, counts.recall
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def confusion_matrix(predicted: Sequence[int], actual: Sequence[int], num_classes: int) -> np.ndarray:
    """rows: actual class, columns: predicted class"""
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (np.asarray(actual, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)
    return matrix


def per_class_counts(predicted: Sequence[int], actual: Sequence[int],
                     num_classes: Optional[int] = None) -> List[ConfusionCounts]:
    """One-vs-rest counts per class"""
    if num_classes is None:
        num_classes = int(max(max(predicted, default=0), max(actual, default=0))) + 1
    matrix = confusion_matrix(predicted, actual, num_classes)
    total = int(matrix.sum())
    counts = []
    for c in range(num_classes):
        tp = int(matrix[c, c])
        fp = int(matrix[:, c].sum()) - tp
        fn = int(matrix[c, :].sum()) - tp
        counts.append(ConfusionCounts(tp, fp, fn, total - tp - fp - fn))
    return counts


def macro_f1(counts: Sequence[ConfusionCounts]) -> float:
    """Unweighted mean of one-vs-rest binary F1"""
    if not counts:
        raise UndefinedMetricError("Macro F1 needs at least one class")
    return float(np.mean([binary_f1(c) for c in counts]))


def top1_accuracy(predicted: Sequence[int], actual: Sequence[int]) -> float:
    predicted, actual = np.asarray(predicted), np.asarray(actual)
    if len(actual) == 0:
        raise UndefinedMetricError("Accuracy of an empty sample set")
    return float((predicted == actual).mean())
