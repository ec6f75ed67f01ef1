#!/usr/bin/env python3
"""
Domain types shared across patching, training and evaluation.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import LabelError, UsageError


class Strategy(Enum):
    """Patch collection strategy"""
    SLIDE_WINDOW = "sw"
    IMAGE_PYRAMID = "ip"
    SPARSE_SAMPLING = "ss"

    @classmethod
    def parse(cls, value) -> "Strategy":
        if isinstance(value, Strategy):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UsageError(f"Unknown patch strategy '{value}'. Use one of: sw, ip, ss")


class Setting(Enum):
    """Application setting (detection / one-stage / two-stage recognition)"""
    I_DET = "i-det"
    I_REC = "i-rec"
    II_REC_I = "ii-rec-i"
    II_REC_N = "ii-rec-n"

    @classmethod
    def parse(cls, value) -> "Setting":
        if isinstance(value, Setting):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UsageError(f"Unknown setting '{value}'. Use one of: i-det, i-rec, ii-rec-i, ii-rec-n")

    @property
    def is_detection(self) -> bool:
        return self is Setting.I_DET

    @property
    def has_normal_class(self) -> bool:
        return self is not Setting.II_REC_I


NORMAL_CLASS_NAME = "normal"
DISTRESSED_CLASS_NAME = "distressed"


@dataclass
class LabeledImage:
    """Image pixels with an integer class label and split tag.

    ``pixels`` is an (H, W) grayscale or (H, W, 3) uint8 array.
    """
    pixels: np.ndarray
    label: int
    num_classes: int
    split: str = "train"
    path: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.label < self.num_classes:
            raise LabelError(f"Label {self.label} outside [0, {self.num_classes})")

    @property
    def dims(self):
        """(width, height)"""
        return int(self.pixels.shape[1]), int(self.pixels.shape[0])

    @property
    def one_hot(self) -> np.ndarray:
        vector = np.zeros(self.num_classes, dtype=np.float32)
        vector[self.label] = 1.0
        return vector
