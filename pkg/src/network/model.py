#!/usr/bin/env python3
"""
Composite patch label model: label inference network followed by the decision network.
"""

import logging
from typing import Dict, Tuple

import torch
from torch import nn

from core.config import PipelineConfig
from .backbones import build_backbone
from .decision import ComprehensiveDecisionNetwork
from .label_inference import PatchLabelInferenceNetwork

logger = logging.getLogger("patchlabel_model")


class PatchLabelModel(nn.Module):
    """S = PLIN(patches); y = CDN(S)"""

    def __init__(self, plin: PatchLabelInferenceNetwork, cdn: ComprehensiveDecisionNetwork):
        super().__init__()
        self.plin = plin
        self.cdn = cdn

    def forward(self, patches: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """(B, m, ch, w, w) -> probabilities (B, C), confidences (B, m, C)"""
        confidences = self.plin(patches)
        return self.cdn(confidences), confidences


def build_model(config: PipelineConfig, pretrained: bool = None) -> PatchLabelModel:
    """Assemble the model a configuration describes.

    ``pretrained`` overrides the backbone spec, e.g. when weights will come from a checkpoint.
    """
    spec = config.backbone
    if pretrained is not None and pretrained != spec.pretrained:
        spec = type(spec)(name=spec.name, pretrained=pretrained, feature_config=spec.feature_config)
    backbone = build_backbone(spec, config.num_classes, config.channels)
    plin = PatchLabelInferenceNetwork(backbone, config.pyramid.window_size)
    cdn = ComprehensiveDecisionNetwork(config.patch_count, config.num_classes, config.dropout)
    return PatchLabelModel(plin, cdn)


def parameter_count(model: PatchLabelModel) -> Dict[str, int]:
    """Trainable parameter counts per component"""
    plin = sum(p.numel() for p in model.plin.parameters() if p.requires_grad)
    cdn = sum(p.numel() for p in model.cdn.parameters() if p.requires_grad)
    return {'plin': plin, 'cdn': cdn, 'total': plin + cdn}
