#!/usr/bin/env python3
"""
Patch Extraction Module

Turns a labeled image into the ordered patch set fed to the label inference network.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import cv2
import numpy as np

from core.errors import ShapeError
from core.types import LabeledImage, Strategy
from .geometry import PatchBox, PyramidSpec, boxes_per_layer, pyramid_patches
from .sparse_sampler import DEFAULT_MAX_COMBINATIONS, per_layer_counts, sparse_sample

logger = logging.getLogger("patchlabel_extractor")


@dataclass
class PatchSet:
    """Ordered patches with their boxes.

    ``patches`` has shape (m, window, window) or (m, window, window, channels).
    """
    patches: np.ndarray
    boxes: Tuple[PatchBox, ...]
    strategy: Strategy

    def __len__(self) -> int:
        return len(self.boxes)

    @property
    def layer_ids(self) -> List[int]:
        return [box.layer for box in self.boxes]

    @property
    def window_size(self) -> int:
        return int(self.patches.shape[1])


@lru_cache(maxsize=64)
def plan_boxes(
    strategy: Strategy,
    spec: PyramidSpec,
    alpha: float = 1.0,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> Tuple[PatchBox, ...]:
    """Boxes a strategy collects from an image already resized to the pyramid's layer 0.

    Geometry depends only on the configuration, so the (possibly expensive) sparse
    plan is computed once per configuration.
    """
    if strategy is Strategy.SLIDE_WINDOW:
        return tuple(pyramid_patches(spec.source_dims, spec.first_layer_only()))

    boxes = pyramid_patches(spec.source_dims, spec)
    if strategy is Strategy.IMAGE_PYRAMID:
        return tuple(boxes)

    layer_sizes = boxes_per_layer(boxes)
    counts = per_layer_counts(layer_sizes, alpha)
    plan = sparse_sample(boxes, counts, alpha=alpha, max_combinations=max_combinations)
    chosen = plan.flat_indices(layer_sizes)
    logger.info("Sparse sampling alpha=%.3f keeps %s of %s patches per layer", alpha, counts, layer_sizes)
    return tuple(boxes[index] for index in chosen)


def resize_to(pixels: np.ndarray, dims: Tuple[int, int]) -> np.ndarray:
    """Resize to (width, height); no-op when already there"""
    if (pixels.shape[1], pixels.shape[0]) == tuple(dims):
        return pixels
    interpolation = cv2.INTER_AREA if pixels.shape[1] > dims[0] else cv2.INTER_LINEAR
    return cv2.resize(pixels, tuple(dims), interpolation=interpolation)


def extract_patches(
    image: LabeledImage,
    strategy: Strategy,
    spec: PyramidSpec,
    alpha: float = 1.0,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> PatchSet:
    """Resize to every layer, crop the planned boxes and return them in plan order"""
    strategy = Strategy.parse(strategy)
    boxes = plan_boxes(strategy, spec, alpha, max_combinations)
    base = resize_to(image.pixels, spec.source_dims)

    layers = {}
    crops = []
    for box in boxes:
        if box.layer not in layers:
            layers[box.layer] = resize_to(base, spec.layer_resolutions[box.layer])
        x, y, w, h = box.box_in_layer
        crop = layers[box.layer][y:y + h, x:x + w]
        if crop.shape[0] != spec.window_size or crop.shape[1] != spec.window_size:
            raise ShapeError(f"Patch at {box.box_in_layer} has shape {crop.shape[:2]}")
        crops.append(crop)

    return PatchSet(patches=np.stack(crops), boxes=boxes, strategy=strategy)
