#!/usr/bin/env python3
"""
Seeded train-time augmentation: flips, quarter-turn rotations and brightness.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from patching import resize_to

Seed = Union[int, Sequence[int]]

BRIGHTNESS_RANGE = (0.8, 1.2)


@dataclass(frozen=True)
class AugmentationDraw:
    horizontal_flip: bool = False
    vertical_flip: bool = False
    quarter_turns: int = 0
    brightness: float = 1.0

    @property
    def is_identity(self) -> bool:
        return (not self.horizontal_flip and not self.vertical_flip
                and self.quarter_turns % 4 == 0 and self.brightness == 1.0)


IDENTITY = AugmentationDraw()


def draw_augmentation(rng: np.random.Generator) -> AugmentationDraw:
    return AugmentationDraw(
        horizontal_flip=bool(rng.random() < 0.5),
        vertical_flip=bool(rng.random() < 0.5),
        quarter_turns=int(rng.integers(0, 4)),
        brightness=float(rng.uniform(*BRIGHTNESS_RANGE)),
    )


def apply_augmentation(pixels: np.ndarray, draw: AugmentationDraw) -> np.ndarray:
    """Flips, then rotation, then brightness; the output keeps the input's dims"""
    height, width = pixels.shape[:2]
    out = pixels
    if draw.horizontal_flip:
        out = out[:, ::-1]
    if draw.vertical_flip:
        out = out[::-1, :]
    if draw.quarter_turns % 4:
        out = np.rot90(out, k=draw.quarter_turns % 4)
        if out.shape[:2] != (height, width):
            out = resize_to(np.ascontiguousarray(out), (width, height))
    if draw.brightness != 1.0:
        out = np.clip(np.rint(out.astype(np.float32) * draw.brightness), 0, 255).astype(pixels.dtype)
    return np.ascontiguousarray(out)


def augment(pixels: np.ndarray, seed: Seed) -> np.ndarray:
    return apply_augmentation(pixels, draw_augmentation(np.random.default_rng(seed)))


class SeededAugmentation:
    """Dataset transform whose draw depends only on (seed, epoch, item index)"""

    def __init__(self, seed: int):
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __call__(self, pixels: np.ndarray, index: int) -> np.ndarray:
        return augment(pixels, (self.seed, self.epoch, index))
