#!/usr/bin/env python3
"""
Per-patch backbones.

Each backbone maps a (N, channels, window, window) batch to (N, C) raw scores and
exposes its last affine layer as ``final_layer``.
"""

import logging
from typing import Callable, Dict, Sequence

import torch
from torch import nn
from tenacity import retry, stop_after_attempt, wait_exponential

from core.config import BackboneSpec
from core.errors import ConfigError

logger = logging.getLogger("patchlabel_backbones")


class TinyBackbone(nn.Module):
    """Four strided conv blocks with global max pooling, for desk-scale runs and tests"""

    def __init__(self, num_classes: int, in_channels: int = 1,
                 widths: Sequence[int] = (16, 32, 32, 64), downsample: int = 3,
                 batch_norm: bool = True):
        super().__init__()
        layers = [nn.AvgPool2d(downsample)] if downsample > 1 else []
        channels = in_channels
        for width in widths:
            layers.append(nn.Conv2d(channels, width, kernel_size=3, stride=2, padding=1))
            if batch_norm:
                layers.append(nn.BatchNorm2d(width))
            layers.append(nn.ReLU(inplace=True))
            channels = width
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveMaxPool2d(1)
        self.head = nn.Linear(channels, num_classes)

    @property
    def final_layer(self) -> nn.Linear:
        return self.head

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        features = self.pool(self.features(x))
        return self.head(torch.flatten(features, 1))


class EfficientNetB3Backbone(nn.Module):
    """torchvision EfficientNet-B3 with a C-way head; gray input is replicated to RGB"""

    IMAGENET_MEAN = (0.485, 0.456, 0.406)
    IMAGENET_STD = (0.229, 0.224, 0.225)

    def __init__(self, num_classes: int, in_channels: int = 1, pretrained: bool = True):
        super().__init__()
        self.in_channels = in_channels
        self.net = _load_efficientnet_b3(pretrained)
        in_features = self.net.classifier[-1].in_features
        self.net.classifier[-1] = nn.Linear(in_features, num_classes)
        self.register_buffer("mean", torch.tensor(self.IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(self.IMAGENET_STD).view(1, 3, 1, 1))

    @property
    def final_layer(self) -> nn.Linear:
        return self.net.classifier[-1]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[1] == 1:
            x = x.expand(-1, 3, -1, -1)
        return self.net((x - self.mean) / self.std)


@retry(
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=2, max=10)
)
def _load_efficientnet_b3(pretrained: bool) -> nn.Module:
    """Build EfficientNet-B3, downloading ImageNet weights when requested (retried)"""
    from torchvision.models import EfficientNet_B3_Weights, efficientnet_b3

    weights = EfficientNet_B3_Weights.IMAGENET1K_V1 if pretrained else None
    if pretrained:
        logger.info("📥 Loading pretrained EfficientNet-B3 weights")
    return efficientnet_b3(weights=weights)


def _build_tiny(spec: BackboneSpec, num_classes: int, in_channels: int) -> nn.Module:
    options = spec.options()
    return TinyBackbone(
        num_classes,
        in_channels=in_channels,
        widths=tuple(options.get("widths", (16, 32, 32, 64))),
        downsample=int(options.get("downsample", 3)),
        batch_norm=bool(options.get("batch_norm", True)),
    )


def _build_efficientnet(spec: BackboneSpec, num_classes: int, in_channels: int) -> nn.Module:
    return EfficientNetB3Backbone(num_classes, in_channels=in_channels, pretrained=spec.pretrained)


BACKBONES: Dict[str, Callable[[BackboneSpec, int, int], nn.Module]] = {
    "tiny": _build_tiny,
    "effnet-b3": _build_efficientnet,
}


def build_backbone(spec: BackboneSpec, num_classes: int, in_channels: int = 1) -> nn.Module:
    """Instantiate a registered backbone"""
    if spec.name not in BACKBONES:
        raise ConfigError(f"Backbone '{spec.name}' not found. Available backbones: {list(BACKBONES)}")
    backbone = BACKBONES[spec.name](spec, num_classes, in_channels)
    logger.debug("Built backbone %s for %d classes", spec.name, num_classes)
    return backbone
