#!/usr/bin/env python3
"""
Comprehensive Decision Network

Four affine layers over the flattened confidence matrix:
[mC -> mC, ReLU, Dropout] x 2, mC -> mC, mC -> C, softmax.
"""

import math
from typing import Union

import torch
from torch import nn

from core.errors import ShapeError
from .label_inference import ConfidenceMatrix


class ComprehensiveDecisionNetwork(nn.Module):
    """Maps an m x C confidence matrix to a probability vector over C"""

    def __init__(self, num_patches: int, num_classes: int, dropout: float = 0.5):
        super().__init__()
        self.num_patches = num_patches
        self.num_classes = num_classes
        width = num_patches * num_classes
        self.layers = nn.Sequential(
            nn.Linear(width, width),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(width, width),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(width, width),
            nn.Linear(width, num_classes),
        )
        self.reset_parameters()

    def reset_parameters(self) -> None:
        """Fan-in scaled uniform weights, zero biases"""
        for module in self.layers:
            if isinstance(module, nn.Linear):
                bound = 1.0 / math.sqrt(module.in_features)
                nn.init.uniform_(module.weight, -bound, bound)
                nn.init.zeros_(module.bias)

    @property
    def affine_layers(self):
        return [m for m in self.layers if isinstance(m, nn.Linear)]

    def logits(self, confidences: torch.Tensor) -> torch.Tensor:
        if tuple(confidences.shape[-2:]) != (self.num_patches, self.num_classes):
            raise ShapeError(
                f"Confidence matrix {tuple(confidences.shape[-2:])} does not match "
                f"decision network ({self.num_patches}, {self.num_classes})"
            )
        return self.layers(confidences.reshape(confidences.shape[0], -1))

    def forward(self, confidences: torch.Tensor) -> torch.Tensor:
        """(B, m, C) -> (B, C) probabilities"""
        return torch.softmax(self.logits(confidences), dim=-1)


def cdn_forward(confidences: Union[ConfidenceMatrix, torch.Tensor],
                network: ComprehensiveDecisionNetwork, mode: str = "eval") -> torch.Tensor:
    """Probability vector for one confidence matrix (or a batch of them)"""
    network.train(mode == "train")
    values = confidences.values if isinstance(confidences, ConfidenceMatrix) else confidences
    single = values.dim() == 2
    if single:
        values = values.unsqueeze(0)
    probabilities = network(values)
    return probabilities[0] if single else probabilities
