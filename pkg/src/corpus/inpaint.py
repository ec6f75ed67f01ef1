#!/usr/bin/env python3
"""
Normal-image synthesis: every masked (diseased) pixel takes the value of its
nearest unmasked pixel.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.spatial import cKDTree

from core.errors import ShapeError, SynthesisError
from .images import read_image

logger = logging.getLogger("patchlabel_inpaint")

PathLike = Union[str, os.PathLike]

MASK_SUFFIX = "_mask"
MASK_THRESHOLD = 128


@dataclass
class MaskedCrackImage:
    """Image pixels with a boolean mask of diseased pixels"""
    pixels: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask).astype(bool)
        if self.mask.shape != self.pixels.shape[:2]:
            raise ShapeError(f"Mask shape {self.mask.shape} does not match image {self.pixels.shape[:2]}")

    @property
    def masked_fraction(self) -> float:
        return float(self.mask.mean()) if self.mask.size else 0.0

    @classmethod
    def load(cls, image_path: PathLike, mask_path: PathLike, channels: int = 1) -> "MaskedCrackImage":
        pixels = read_image(image_path, channels)
        mask = read_image(mask_path, 1) >= MASK_THRESHOLD
        return cls(pixels, mask)


def mask_path_for(image_path: PathLike, extension: str = ".png") -> Path:
    """``crack_01.jpg`` -> ``crack_01_mask.png``"""
    image_path = Path(image_path)
    return image_path.with_name(image_path.stem + MASK_SUFFIX + extension)


def synthesize_normal(crack: MaskedCrackImage) -> np.ndarray:
    """Fill the mask from the nearest unmasked pixel (ties: smallest row, then column)"""
    mask = crack.mask
    if not mask.any():
        return crack.pixels.copy()
    if mask.all():
        raise SynthesisError("Mask covers the entire image; no neighbor pixels to copy from")

    # Distance of every masked pixel to the closest unmasked one
    distance = distance_transform_edt(mask)
    targets = np.argwhere(mask)
    sources = np.argwhere(~mask)
    tree = cKDTree(sources)

    radii = distance[mask] + 1e-6
    neighborhoods = tree.query_ball_point(targets, r=radii)

    chosen = np.empty(len(targets), dtype=np.int64)
    for i, (target, candidates) in enumerate(zip(targets, neighborhoods)):
        candidates = np.asarray(candidates, dtype=np.int64)
        offsets = sources[candidates] - target
        squared = (offsets * offsets).sum(axis=1)
        nearest = candidates[squared == squared.min()]
        # argwhere is row-major, so the smallest source index is the smallest (row, col)
        chosen[i] = nearest.min()

    output = crack.pixels.copy()
    rows, cols = sources[chosen].T
    output[targets[:, 0], targets[:, 1]] = crack.pixels[rows, cols]
    logger.debug("Filled %d masked pixels (%.2f%% of image)", len(targets), 100.0 * crack.masked_fraction)
    return output
