#!/usr/bin/env python3
"""
Crack/normal corpus built from mask-annotated crack images.

Every crack image is kept; a seeded subset is additionally erased with
``synthesize_normal`` to produce the normal class. All outputs are grayscale at
the pyramid's source resolution. The corpus is emitted as several split
replicas, each an independent seeded half/half train/test split.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from core.errors import ConfigError
from core.types import NORMAL_CLASS_NAME
from patching import resize_to
from .images import IMAGE_EXTENSIONS, is_image_file, read_image, write_image
from .inpaint import MASK_SUFFIX, MaskedCrackImage, mask_path_for, synthesize_normal
from .manifest import CorpusManifest, ManifestEntry, class_map_for

logger = logging.getLogger("patchlabel_crack500")

PathLike = Union[str, os.PathLike]

CRACK_CLASS_NAME = "crack"
DEFAULT_REPLICAS = 5
SOURCE_DIMS = (1200, 900)


def find_mask(image_path: Path) -> Optional[Path]:
    for extension in (".png",) + IMAGE_EXTENSIONS:
        candidate = mask_path_for(image_path, extension)
        if candidate.is_file():
            return candidate
    return None


def paired_crack_images(crack_dir: PathLike) -> List[Tuple[Path, Path]]:
    """(image, mask) pairs; images without a mask are skipped with a warning"""
    crack_dir = Path(crack_dir)
    if not crack_dir.is_dir():
        raise ConfigError(f"Crack directory not found: {crack_dir}")
    pairs = []
    for image in sorted(p for p in crack_dir.rglob("*") if is_image_file(p)):
        if image.stem.endswith(MASK_SUFFIX):
            continue
        mask = find_mask(image)
        if mask is None:
            logger.warning("⚠️ No mask for %s, skipping", image)
            continue
        pairs.append((image, mask))
    return pairs


def half_split(count: int, rng: np.random.Generator) -> List[str]:
    """ceil(count / 2) train tags, the rest test, in a seeded order"""
    tags = np.array(["test"] * count, dtype=object)
    tags[rng.permutation(count)[:math.ceil(count / 2)]] = "train"
    return list(tags)


def prepare_crack500_pdd(crack_dir: PathLike, normals_to_generate: int, seed: int, out_dir: PathLike,
                         replicas: int = DEFAULT_REPLICAS, dims: Tuple[int, int] = SOURCE_DIMS,
                         workers: int = 4) -> List[CorpusManifest]:
    """Write images/{crack,normal}/*.png and manifest_r<k>.tsv per replica under out_dir"""
    if normals_to_generate < 0:
        raise ConfigError(f"normals_to_generate must be non-negative, got {normals_to_generate}")
    if replicas < 1:
        raise ConfigError(f"At least one split replica is required, got {replicas}")
    pairs = paired_crack_images(crack_dir)
    if not pairs:
        raise ConfigError(f"No mask-annotated crack images found in {crack_dir}")
    if normals_to_generate > len(pairs):
        raise ConfigError(
            f"Cannot synthesize {normals_to_generate} normal images from {len(pairs)} crack images"
        )

    out_dir = Path(out_dir)
    image_root = out_dir / "images"
    rng = np.random.default_rng(seed)
    erase = set(rng.choice(len(pairs), size=normals_to_generate, replace=False).tolist())

    def convert(index: int) -> List[ManifestEntry]:
        image_path, mask_path = pairs[index]
        crack = MaskedCrackImage.load(image_path, mask_path)
        produced = []
        relative = f"{CRACK_CLASS_NAME}/{image_path.stem}.png"
        write_image(image_root / relative, resize_to(crack.pixels, dims))
        produced.append(ManifestEntry(relative, CRACK_CLASS_NAME, ""))
        if index in erase:
            relative = f"{NORMAL_CLASS_NAME}/{image_path.stem}_normal.png"
            write_image(image_root / relative, resize_to(synthesize_normal(crack), dims))
            produced.append(ManifestEntry(relative, NORMAL_CLASS_NAME, ""))
        return produced

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        converted = list(pool.map(convert, range(len(pairs))))
    cracks = [group[0] for group in converted]
    normals = [group[1] for group in converted if len(group) > 1]
    entries = normals + cracks
    class_map = class_map_for([NORMAL_CLASS_NAME, CRACK_CLASS_NAME])

    manifests = []
    for replica in range(replicas):
        tags = half_split(len(entries), np.random.default_rng([seed, replica]))
        split_entries = [ManifestEntry(e.path, e.class_name, tag) for e, tag in zip(entries, tags)]
        manifest = CorpusManifest(split_entries, class_map, root=image_root, seed=seed)
        manifest.save(out_dir / f"manifest_r{replica}.tsv")
        manifests.append(manifest)

    logger.info("🛣️ Crack corpus: %d crack + %d normal images, %d split replicas in %s",
                len(cracks), len(normals), replicas, out_dir)
    if not manifests[0].is_detection_ready():
        logger.warning("⚠️ Corpus has no normal images; it cannot be used for detection")
    return manifests
