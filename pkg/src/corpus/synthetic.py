#!/usr/bin/env python3
"""
Synthetic Pavement Corpus

Procedural grayscale pavement images: a smooth random texture plus, for every
class but ``normal``, one distress motif covering at most 10% of the image.
Every image is a pure function of (seed, class index, image index).
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import cv2
import numpy as np
from scipy.ndimage import gaussian_filter

from core.errors import ConfigError
from core.types import NORMAL_CLASS_NAME
from .ingest import SplitRatios, assign_splits
from .images import write_image
from .manifest import CorpusManifest, ManifestEntry, class_map_for

logger = logging.getLogger("patchlabel_synthetic")

PathLike = Union[str, os.PathLike]

SYNTHETIC_CLASS_NAMES = (
    NORMAL_CLASS_NAME, "alligator", "crack_pouring", "longitudinal",
    "massive", "transverse", "raveling", "mending",
)
MAX_DISTRESS_FRACTION = 0.10
DEFAULT_DIMS = (1200, 900)
DEFAULT_SPLIT: SplitRatios = {"train": 0.5, "test": 0.5}


def background_texture(dims: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Asphalt-like texture around gray 128 (float32, H x W)"""
    width, height = dims
    fine = gaussian_filter(rng.normal(0.0, 1.0, (height, width)), sigma=1.0) * 18.0
    coarse = gaussian_filter(rng.normal(0.0, 1.0, (height, width)), sigma=12.0) * 60.0
    return (128.0 + fine + coarse).astype(np.float32)


def _random_walk(rng: np.random.Generator, start: np.ndarray, heading: float, steps: int,
                 step_length: float, jitter: float) -> np.ndarray:
    points = [start]
    for _ in range(steps):
        heading += rng.normal(0.0, jitter)
        points.append(points[-1] + step_length * np.array([np.cos(heading), np.sin(heading)]))
    return np.round(np.asarray(points)).astype(np.int32)


def _line_motif(horizontal: bool) -> Callable:
    def draw(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
        height, width = mask.shape
        span = width if horizontal else height
        heading = (0.0 if horizontal else np.pi / 2) + rng.normal(0.0, 0.12)
        start = (np.array([0.0, rng.uniform(0.2, 0.8) * height]) if horizontal
                 else np.array([rng.uniform(0.2, 0.8) * width, 0.0]))
        steps = 24
        walk = _random_walk(rng, start, heading, steps, span * scale / steps, 0.15)
        thickness = max(2, int(round(rng.uniform(4, 9) * scale)))
        cv2.polylines(mask, [walk.reshape(-1, 1, 2)], False, 1, thickness)
    return draw


def _alligator(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
    height, width = mask.shape
    cx, cy = rng.uniform(0.3, 0.7) * width, rng.uniform(0.3, 0.7) * height
    size = 0.35 * min(width, height) * scale
    cells = 6
    for i in range(cells + 1):
        offset = -size / 2 + i * size / cells
        for horizontal in (True, False):
            start = np.array([cx - size / 2, cy + offset]) if horizontal else np.array([cx + offset, cy - size / 2])
            walk = _random_walk(rng, start, 0.0 if horizontal else np.pi / 2, cells, size / cells, 0.35)
            cv2.polylines(mask, [walk.reshape(-1, 1, 2)], False, 1, 2)


def _crack_pouring(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
    height, width = mask.shape
    start = np.array([rng.uniform(0.1, 0.3) * width, rng.uniform(0.1, 0.9) * height])
    steps = 20
    walk = _random_walk(rng, start, rng.uniform(-0.4, 0.4), steps, 0.7 * width * scale / steps, 0.05)
    cv2.polylines(mask, [walk.reshape(-1, 1, 2)], False, 1, max(4, int(round(16 * scale))))


def _massive(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
    height, width = mask.shape
    trunk_start = np.array([rng.uniform(0.2, 0.8) * width, rng.uniform(0.2, 0.8) * height])
    for _ in range(5):
        walk = _random_walk(rng, trunk_start, rng.uniform(0, 2 * np.pi), 12,
                            0.35 * min(width, height) * scale / 12, 0.3)
        cv2.polylines(mask, [walk.reshape(-1, 1, 2)], False, 1, max(2, int(round(6 * scale))))


def _raveling(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
    height, width = mask.shape
    cx, cy = rng.uniform(0.25, 0.75) * width, rng.uniform(0.25, 0.75) * height
    spread = 0.12 * min(width, height) * scale
    for _ in range(int(400 * scale)):
        x, y = rng.normal(cx, spread), rng.normal(cy, spread)
        cv2.circle(mask, (int(x), int(y)), int(rng.integers(2, 6)), 1, -1)


def _mending(mask: np.ndarray, rng: np.random.Generator, scale: float) -> None:
    height, width = mask.shape
    center = (int(rng.uniform(0.3, 0.7) * width), int(rng.uniform(0.3, 0.7) * height))
    axes = (int(0.2 * width * scale * rng.uniform(0.8, 1.2)), int(0.15 * height * scale * rng.uniform(0.8, 1.2)))
    cv2.ellipse(mask, center, (max(axes[0], 4), max(axes[1], 4)), rng.uniform(0, 180), 0, 360, 1, -1)


MOTIFS: Dict[str, Callable] = {
    "alligator": _alligator,
    "crack_pouring": _crack_pouring,
    "longitudinal": _line_motif(horizontal=False),
    "massive": _massive,
    "transverse": _line_motif(horizontal=True),
    "raveling": _raveling,
    "mending": _mending,
}
# Brightness shift applied inside the mask; mending patches are lighter than the road
MOTIF_SHADE = {"mending": +45.0, "crack_pouring": -95.0}
DEFAULT_SHADE = -70.0


def synthetic_class_names(num_classes: int) -> List[str]:
    if num_classes < 2:
        raise ConfigError(f"A synthetic corpus needs at least 2 classes, got {num_classes}")
    names = list(SYNTHETIC_CLASS_NAMES[:num_classes])
    names.extend(f"distress_{k}" for k in range(len(names), num_classes))
    return names


def _motif_for(class_name: str) -> Callable:
    if class_name in MOTIFS:
        return MOTIFS[class_name]
    # extra classes reuse the motifs in a fixed order
    ordered = list(MOTIFS.values())
    return ordered[int(class_name.rsplit("_", 1)[1]) % len(ordered)]


def generate_synthetic_image(class_name: str, dims: Tuple[int, int],
                             rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Return (uint8 pixels H x W, boolean distress mask); the mask is empty for normal"""
    texture = background_texture(dims, rng)
    mask = np.zeros(texture.shape, dtype=np.uint8)
    if class_name != NORMAL_CLASS_NAME:
        motif = _motif_for(class_name)
        state = rng.bit_generator.state
        scale = 1.0
        while True:
            rng.bit_generator.state = state
            mask[:] = 0
            motif(mask, rng, scale)
            fraction = mask.mean()
            if 0 < fraction <= MAX_DISTRESS_FRACTION:
                break
            if fraction == 0:
                mask[texture.shape[0] // 2, texture.shape[1] // 2] = 1
                break
            scale *= 0.75
        shade = MOTIF_SHADE.get(class_name, DEFAULT_SHADE)
        grain = rng.normal(0.0, 6.0, texture.shape).astype(np.float32)
        texture = np.where(mask > 0, texture + shade + grain, texture)
    pixels = np.clip(np.round(texture), 0, 255).astype(np.uint8)
    return pixels, mask.astype(bool)


def generate_synthetic_corpus(out_dir: PathLike, n_per_class: int, num_classes: int,
                              dims: Tuple[int, int] = DEFAULT_DIMS, seed: int = 0,
                              split_ratios: Optional[SplitRatios] = None,
                              workers: int = 4) -> CorpusManifest:
    """Write images/<class>/*.png, masks/<class>/*_mask.png and manifest.tsv under out_dir"""
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be positive, got {n_per_class}")
    out_dir = Path(out_dir)
    image_root = out_dir / "images"
    names = synthetic_class_names(num_classes)
    class_map = class_map_for(names)

    jobs = [(name, index) for name in sorted(names, key=class_map.get) for index in range(n_per_class)]

    def render(job: Tuple[str, int]) -> str:
        name, index = job
        rng = np.random.default_rng([seed, class_map[name], index])
        pixels, mask = generate_synthetic_image(name, dims, rng)
        relative = f"{name}/{name}_{index:04d}.png"
        write_image(image_root / relative, pixels)
        if name != NORMAL_CLASS_NAME:
            write_image(out_dir / "masks" / name / f"{name}_{index:04d}_mask.png", mask.astype(np.uint8) * 255)
        return relative

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        paths = list(pool.map(render, jobs))

    rng = np.random.default_rng(seed)
    entries: List[ManifestEntry] = []
    for name in sorted(names, key=class_map.get):
        own = [p for (n, _), p in zip(jobs, paths) if n == name]
        for path, tag in assign_splits(own, split_ratios or DEFAULT_SPLIT, rng):
            entries.append(ManifestEntry(path, name, tag))

    manifest = CorpusManifest(entries, class_map, root=image_root, seed=seed)
    manifest.save(out_dir / "manifest.tsv")
    logger.info("🧪 Synthetic corpus: %d classes x %d images at %dx%d in %s",
                num_classes, n_per_class, dims[0], dims[1], out_dir)
    return manifest


def synthetic_mask_path(manifest: CorpusManifest, entry: ManifestEntry) -> Optional[Path]:
    """Generator mask written for a synthetic entry (None for normal images)"""
    if entry.class_name == NORMAL_CLASS_NAME:
        return None
    stem = Path(entry.path).stem
    return manifest.root.parent / "masks" / entry.class_name / f"{stem}_mask.png"
