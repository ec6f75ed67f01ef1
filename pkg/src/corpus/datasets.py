#!/usr/bin/env python3
"""
torch Dataset over manifest entries: read, optionally transform, extract patches.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import Dataset

from core.config import PipelineConfig
from core.types import LabeledImage
from network.label_inference import patch_tensor
from patching import extract_patches, resize_to
from .images import read_image
from .manifest import CorpusManifest, ManifestEntry

# (pixels, dataset index) -> pixels
PixelTransform = Callable[[np.ndarray, int], np.ndarray]


class PatchDataset(Dataset):
    """Items are (patches (m, ch, w, w) float tensor, label, index)"""

    def __init__(self, manifest: CorpusManifest, config: PipelineConfig,
                 entries: Optional[Sequence[ManifestEntry]] = None,
                 transform: Optional[PixelTransform] = None):
        self.manifest = manifest
        self.config = config
        self.entries = list(manifest.entries if entries is None else entries)
        self.transform = transform

    def __len__(self) -> int:
        return len(self.entries)

    def load(self, index: int) -> LabeledImage:
        entry = self.entries[index]
        pixels = read_image(self.manifest.absolute_path(entry), self.config.channels)
        # transforms see the pyramid source resolution
        pixels = resize_to(pixels, self.config.pyramid.source_dims)
        return LabeledImage(pixels, self.manifest.label_of(entry), self.manifest.num_classes,
                            entry.split, entry.path)

    def __getitem__(self, index: int) -> Tuple[torch.Tensor, int, int]:
        image = self.load(index)
        if self.transform is not None:
            image.pixels = self.transform(image.pixels, index)
        patch_set = extract_patches(image, self.config.strategy, self.config.pyramid,
                                    self.config.effective_alpha, self.config.max_combinations)
        return patch_tensor(patch_set, self.config.channels), image.label, index
