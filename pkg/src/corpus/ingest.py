#!/usr/bin/env python3
"""
Corpus Ingestion Module

Builds a manifest from a class-folder tree (one subdirectory per class).
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import IngestionError
from core.types import NORMAL_CLASS_NAME
from .images import ImageReadError, is_image_file, read_image
from .manifest import CorpusManifest, ManifestEntry, class_map_for

logger = logging.getLogger("patchlabel_ingest")

PathLike = Union[str, os.PathLike]
SplitRatios = Dict[str, float]

DEFAULT_SPLIT_RATIOS: SplitRatios = {"train": 0.17, "test": 0.83}


def parse_split_ratios(text: str) -> SplitRatios:
    """``train=0.17,test=0.83`` -> {'train': 0.17, 'test': 0.83}"""
    ratios = {}
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        try:
            tag, value = chunk.split("=")
            ratios[tag.strip()] = float(value)
        except ValueError:
            raise IngestionError(f"Cannot parse split ratio '{chunk}' (expected tag=fraction)")
    return ratios


def split_counts(n: int, ratios: SplitRatios) -> List[Tuple[str, int]]:
    """Largest-remainder allocation of n items to split tags (in the given tag order)"""
    total = sum(ratios.values())
    if total <= 0 or any(value < 0 for value in ratios.values()):
        raise IngestionError(f"Split ratios must be non-negative and not all zero: {ratios}")
    shares = [(tag, n * value / total) for tag, value in ratios.items()]
    counts = [(tag, int(np.floor(share))) for tag, share in shares]
    remainder = n - sum(count for _, count in counts)
    order = sorted(range(len(shares)), key=lambda i: (-(shares[i][1] - counts[i][1]), i))
    for i in order[:remainder]:
        counts[i] = (counts[i][0], counts[i][1] + 1)
    return counts


def assign_splits(items: Sequence, ratios: SplitRatios, rng: np.random.Generator) -> List[Tuple[object, str]]:
    """Shuffle items with rng and cut them into splits; returns (item, tag) in original order"""
    permutation = rng.permutation(len(items))
    tags = [""] * len(items)
    position = 0
    for tag, count in split_counts(len(items), ratios):
        for index in permutation[position:position + count]:
            tags[index] = tag
        position += count
    return list(zip(items, tags))


def _readable(path: Path) -> bool:
    try:
        read_image(path)
        return True
    except ImageReadError:
        return False


def ingest(root_dir: PathLike, split_ratios: Optional[SplitRatios] = None, seed: int = 0,
           out_path: Optional[PathLike] = None, check_readable: bool = True,
           workers: int = 4) -> CorpusManifest:
    """Deterministic, per-class stratified split of a class-folder tree"""
    root = Path(root_dir)
    ratios = split_ratios or DEFAULT_SPLIT_RATIOS
    if not root.is_dir():
        raise IngestionError(f"Corpus root is not a directory: {root}")

    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise IngestionError(f"No class folders under {root}")
    if NORMAL_CLASS_NAME not in {p.name for p in class_dirs}:
        logger.warning("⚠️ No '%s' folder under %s; class 0 will be '%s'", NORMAL_CLASS_NAME, root, class_dirs[0].name)
    class_map = class_map_for(p.name for p in class_dirs)

    rng = np.random.default_rng(seed)
    entries: List[ManifestEntry] = []
    quarantined: List[str] = []
    for class_name in sorted(class_map, key=class_map.get):
        files = sorted(p for p in (root / class_name).rglob("*") if is_image_file(p))
        if not files:
            raise IngestionError(f"Class folder '{class_name}' contains no images")
        if check_readable:
            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                readable = list(pool.map(_readable, files))
            quarantined.extend(str(f.relative_to(root)) for f, ok in zip(files, readable) if not ok)
            files = [f for f, ok in zip(files, readable) if ok]
            if not files:
                raise IngestionError(f"Class folder '{class_name}' has no readable images")
        for path, tag in assign_splits(files, ratios, rng):
            entries.append(ManifestEntry(path.relative_to(root).as_posix(), class_name, tag))

    manifest = CorpusManifest(entries, class_map, root=root, seed=seed)
    logger.info("📦 Ingested %d images in %d classes from %s", len(entries), len(class_map), root)
    if quarantined:
        logger.warning("⚠️ %d unreadable images quarantined", len(quarantined))

    if out_path is not None:
        out_path = Path(out_path)
        manifest.save(out_path)
        if quarantined:
            report = out_path.with_name(out_path.stem + ".quarantine.txt")
            report.write_text("\n".join(quarantined) + "\n", encoding="utf-8")
            logger.warning("Quarantine report: %s", report)
    return manifest
