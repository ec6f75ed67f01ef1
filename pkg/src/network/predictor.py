#!/usr/bin/env python3
"""
Prediction Module

Single-image prediction (returns the confidence matrix for interpretability
export) and order-stable batched prediction over manifest entries.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from torch.utils.data import DataLoader

from core.config import PipelineConfig
from core.types import LabeledImage
from corpus.datasets import PatchDataset
from corpus.manifest import CorpusManifest, ManifestEntry
from patching import PatchBox, extract_patches, plan_boxes
from .label_inference import patch_tensor
from .model import PatchLabelModel

logger = logging.getLogger("patchlabel_predictor")


@dataclass
class Prediction:
    """Predicted class, probability vector over C and the m x C confidence matrix"""
    label: int
    probabilities: np.ndarray
    confidences: np.ndarray
    boxes: Tuple[PatchBox, ...] = ()
    path: Optional[str] = None
    true_label: Optional[int] = None


def decide(probabilities: np.ndarray) -> int:
    """argmax; ties resolve to the lowest class index"""
    return int(np.argmax(probabilities))


def _device_of(model: PatchLabelModel) -> torch.device:
    return next(model.parameters()).device


@torch.no_grad()
def predict(image: Union[LabeledImage, np.ndarray], model: PatchLabelModel,
            config: PipelineConfig) -> Prediction:
    if isinstance(image, np.ndarray):
        image = LabeledImage(image, 0, config.num_classes)
    model.eval()
    patch_set = extract_patches(image, config.strategy, config.pyramid,
                                config.effective_alpha, config.max_combinations)
    patches = patch_tensor(patch_set, config.channels).unsqueeze(0).to(_device_of(model))
    probabilities, confidences = model(patches)
    probabilities = probabilities[0].cpu().numpy()
    return Prediction(
        label=decide(probabilities),
        probabilities=probabilities,
        confidences=confidences[0].cpu().numpy(),
        boxes=patch_set.boxes,
        path=image.path,
    )


@torch.no_grad()
def predict_manifest(model: PatchLabelModel, config: PipelineConfig, manifest: CorpusManifest,
                     entries: Optional[Sequence[ManifestEntry]] = None, batch_size: int = 8,
                     workers: int = 0) -> List[Prediction]:
    """Predictions in entry order; worker processes only parallelize loading"""
    dataset = PatchDataset(manifest, config, entries)
    loader = DataLoader(dataset, batch_size=batch_size, shuffle=False, num_workers=workers)
    model.eval()
    device = _device_of(model)
    boxes = plan_boxes(config.strategy, config.pyramid, config.effective_alpha, config.max_combinations)
    predictions: List[Prediction] = []
    for patches, labels, indices in loader:
        probabilities, confidences = model(patches.to(device))
        probabilities = probabilities.cpu().numpy()
        confidences = confidences.cpu().numpy()
        for row, (label, index) in enumerate(zip(labels.tolist(), indices.tolist())):
            predictions.append(Prediction(
                label=decide(probabilities[row]),
                probabilities=probabilities[row],
                confidences=confidences[row],
                boxes=boxes,
                path=dataset.entries[index].path,
                true_label=label,
            ))
    logger.info("Predicted %d images", len(predictions))
    return predictions

