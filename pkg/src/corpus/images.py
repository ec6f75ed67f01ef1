#!/usr/bin/env python3
"""
Raster image I/O with retries for flaky (network) filesystems.
"""

import logging
import os
from pathlib import Path
from typing import Union

import cv2
import numpy as np
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

logger = logging.getLogger("patchlabel_images")

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

PathLike = Union[str, os.PathLike]


class ImageReadError(OSError):
    """cv2 could not decode the file"""


@retry(
    retry=retry_if_exception_type(ImageReadError),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=0.2, min=0.2, max=2),
    reraise=True,
)
def read_image(path: PathLike, channels: int = 1) -> np.ndarray:
    """uint8 (H, W) for channels=1, (H, W, 3) RGB for channels=3"""
    flag = cv2.IMREAD_GRAYSCALE if channels == 1 else cv2.IMREAD_COLOR
    pixels = cv2.imread(str(path), flag)
    if pixels is None:
        raise ImageReadError(f"Cannot decode image: {path}")
    if channels == 3:
        pixels = cv2.cvtColor(pixels, cv2.COLOR_BGR2RGB)
    return pixels


def write_image(path: PathLike, pixels: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if pixels.ndim == 3:
        pixels = cv2.cvtColor(pixels, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), pixels):
        raise OSError(f"Cannot write image: {path}")
    return path


def is_image_file(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in IMAGE_EXTENSIONS
