#!/usr/bin/env python3
"""
Patch Label Inference Network

Runs the backbone on every patch and squashes the raw scores with a logistic
function, giving an m x C confidence matrix per image (rows are patches, in
patch-set order; columns are categories).
"""

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from core.errors import ShapeError
from patching.extractor import PatchSet


@dataclass
class ConfidenceMatrix:
    """m x C per-patch label confidences in (0, 1)"""
    values: torch.Tensor

    @property
    def m(self) -> int:
        return int(self.values.shape[-2])

    @property
    def C(self) -> int:
        return int(self.values.shape[-1])

    def numpy(self) -> np.ndarray:
        return self.values.detach().cpu().numpy()


def patch_tensor(patch_set: PatchSet, channels: int = 1) -> torch.Tensor:
    """(m, channels, window, window) float tensor scaled to [0, 1]"""
    patches = patch_set.patches.astype(np.float32) / 255.0
    if patches.ndim == 3:
        patches = patches[:, None, :, :]
    else:
        patches = np.transpose(patches, (0, 3, 1, 2))
    if patches.shape[1] != channels:
        if patches.shape[1] == 1:
            patches = np.repeat(patches, channels, axis=1)
        else:
            patches = patches.mean(axis=1, keepdims=True)
    return torch.from_numpy(np.ascontiguousarray(patches))


class PatchLabelInferenceNetwork(nn.Module):
    """Backbone applied patch-wise followed by an elementwise sigmoid, clamped to [eps, 1 - eps]"""

    def __init__(self, backbone: nn.Module, window_size: int):
        super().__init__()
        self.backbone = backbone
        self.window_size = window_size

    def forward(self, patches: torch.Tensor) -> torch.Tensor:
        """(B, m, ch, w, w) -> (B, m, C)"""
        if patches.dim() != 5:
            raise ShapeError(f"Expected (batch, patches, channels, h, w), got {tuple(patches.shape)}")
        if patches.shape[-1] != self.window_size or patches.shape[-2] != self.window_size:
            raise ShapeError(
                f"Patch size {tuple(patches.shape[-2:])} does not match window {self.window_size}"
            )
        if patches.shape[1] < 1:
            raise ShapeError("At least one patch per image is required")
        batch, m = patches.shape[:2]
        scores = self.backbone(patches.reshape(batch * m, *patches.shape[2:]))
        # saturated sigmoids are pulled back inside the open interval
        eps = torch.finfo(scores.dtype).eps
        return torch.sigmoid(scores).clamp(eps, 1.0 - eps).reshape(batch, m, -1)


def plin_forward(patch_set: PatchSet, network: PatchLabelInferenceNetwork,
                 mode: str = "eval", channels: int = 1) -> ConfidenceMatrix:
    """Confidence matrix of a single image's patch set"""
    network.train(mode == "train")
    device = next(network.parameters()).device
    dtype = next(network.parameters()).dtype
    patches = patch_tensor(patch_set, channels).to(device=device, dtype=dtype).unsqueeze(0)
    return ConfidenceMatrix(network(patches)[0])
