#!/usr/bin/env python3
"""
Training objectives: cross-entropy on the decision network output, an entrywise
L1 constraint on the confidence matrices of distressed samples, and their
lambda-weighted sum.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import torch

from core.errors import ConfigError, LabelError, ShapeError

PROBABILITY_FLOOR = 1e-12


@dataclass
class LossBreakdown:
    """total = classification + lam * sparsity (tensors, so total stays differentiable)"""
    classification: torch.Tensor
    sparsity: torch.Tensor
    total: torch.Tensor
    lam: float

    def as_floats(self) -> Dict[str, float]:
        return {
            'classification': float(self.classification.detach()),
            'sparsity': float(self.sparsity.detach()),
            'total': float(self.total.detach()),
            'lambda': self.lam,
        }


def _check_one_hot(labels: torch.Tensor) -> None:
    if labels.dim() != 2:
        raise LabelError(f"Labels must be a (batch, C) one-hot matrix, got {tuple(labels.shape)}")
    is_binary = ((labels == 0) | (labels == 1)).all()
    if not bool(is_binary) or not bool((labels.sum(dim=1) == 1).all()):
        raise LabelError("Every label row must be one-hot")


def classification_loss(predictions: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Batch-mean cross-entropy of probability vectors against one-hot labels"""
    _check_one_hot(labels)
    if predictions.shape != labels.shape:
        raise ShapeError(f"Predictions {tuple(predictions.shape)} do not match labels {tuple(labels.shape)}")
    log_probabilities = torch.log(predictions.clamp_min(PROBABILITY_FLOOR))
    return -(labels * log_probabilities).sum(dim=1).mean()


def sparsity_loss(confidences: torch.Tensor, labels: torch.Tensor,
                  normal_class: Optional[int] = 0) -> torch.Tensor:
    """Sum over non-normal samples of the entrywise |S| sum.

    ``normal_class=None`` treats every sample as distressed.
    """
    _check_one_hot(labels)
    if confidences.dim() != 3 or confidences.shape[0] != labels.shape[0]:
        raise ShapeError(
            f"Confidences {tuple(confidences.shape)} do not form a batch matching labels {tuple(labels.shape)}"
        )
    per_sample = confidences.abs().sum(dim=(1, 2))
    if normal_class is None:
        return per_sample.sum()
    distressed = 1.0 - labels[:, normal_class]
    # multiplicative mask: normal rows get an exactly zero gradient
    return (per_sample * distressed.to(per_sample.dtype)).sum()


def total_loss(predictions: torch.Tensor, labels: torch.Tensor, confidences: torch.Tensor,
               lam: float, normal_class: Optional[int] = 0) -> LossBreakdown:
    if lam < 0:
        raise ConfigError(f"lambda cannot be negative: {lam}")
    classification = classification_loss(predictions, labels)
    sparsity = sparsity_loss(confidences, labels, normal_class)
    return LossBreakdown(classification, sparsity, classification + lam * sparsity, lam)
