#!/usr/bin/env python3
"""
Corpus Manifest Module

Line-oriented manifest: a ``#`` header with the class map and seed, then one
``path<TAB>class<TAB>split`` line per image. Paths are relative to ``root``.
The header ends at the first entry, so a path may itself start with ``#``.
"""

import hashlib
import logging
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from core.errors import ConfigError
from core.types import NORMAL_CLASS_NAME

logger = logging.getLogger("patchlabel_manifest")

MANIFEST_MAGIC = "# patchlabel-manifest 1"
HEADER_KEYS = ("root", "checksum", "seed", "class")

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    class_name: str
    split: str


class CorpusManifest:
    """Entries plus a contiguous class map (normal = 0 whenever present)"""

    def __init__(self, entries: Sequence[ManifestEntry], class_map: Dict[str, int],
                 root: PathLike = ".", seed: Optional[int] = None):
        self.entries: List[ManifestEntry] = list(entries)
        self.class_map: Dict[str, int] = dict(class_map)
        self.root = Path(root)
        self.seed = seed
        self._validate()

    def _validate(self) -> None:
        indices = sorted(self.class_map.values())
        if indices != list(range(len(indices))):
            raise ConfigError(f"Class indices must be contiguous from 0: {self.class_map}")
        unknown = {e.class_name for e in self.entries} - set(self.class_map)
        if unknown:
            raise ConfigError(f"Entries use classes missing from the class map: {sorted(unknown)}")
        for entry in self.entries:
            if "\t" in entry.path or "\n" in entry.path:
                raise ConfigError(f"Path cannot contain tabs or newlines: {entry.path!r}")
            if _header_key(entry.path) in HEADER_KEYS:
                raise ConfigError(f"Path reads as a manifest header line: {entry.path!r}")

    # -- views -------------------------------------------------------------

    @property
    def class_names(self) -> List[str]:
        return [name for name, _ in sorted(self.class_map.items(), key=lambda item: item[1])]

    @property
    def num_classes(self) -> int:
        return len(self.class_map)

    @property
    def normal_class(self) -> Optional[int]:
        return self.class_map.get(NORMAL_CLASS_NAME)

    def label_of(self, entry: ManifestEntry) -> int:
        return self.class_map[entry.class_name]

    def absolute_path(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path

    def split(self, tag: str) -> List[ManifestEntry]:
        return [e for e in self.entries if e.split == tag]

    @property
    def split_tags(self) -> List[str]:
        return sorted({e.split for e in self.entries})

    def counts_by_class(self, tag: Optional[str] = None) -> Dict[str, int]:
        entries = self.entries if tag is None else self.split(tag)
        counts = Counter(e.class_name for e in entries)
        return {name: counts.get(name, 0) for name in self.class_names}

    def is_detection_ready(self) -> bool:
        """Needs normal samples and at least one distressed sample"""
        counts = self.counts_by_class()
        normal = counts.get(NORMAL_CLASS_NAME, 0)
        return normal > 0 and sum(counts.values()) > normal

    def subset(self, entries: Iterable[ManifestEntry]) -> "CorpusManifest":
        return CorpusManifest(list(entries), self.class_map, self.root, self.seed)

    # -- serialization -----------------------------------------------------

    def _body_lines(self) -> List[str]:
        lines = [f"# seed\t{'' if self.seed is None else self.seed}"]
        for name in self.class_names:
            lines.append(f"# class\t{name}\t{self.class_map[name]}")
        lines.extend(f"{e.path}\t{e.class_name}\t{e.split}" for e in self.entries)
        return lines

    @property
    def checksum(self) -> str:
        """sha256 of the class map, seed and entries (independent of where the file lives)"""
        return hashlib.sha256("\n".join(self._body_lines()).encode("utf-8")).hexdigest()

    def to_text(self, location: Optional[Path] = None) -> str:
        root = self.root
        if location is not None:
            try:
                root = Path(os.path.relpath(self.root.resolve(), Path(location).resolve().parent))
            except ValueError:
                root = self.root.resolve()
        body = self._body_lines()
        header = [MANIFEST_MAGIC, f"# root\t{root.as_posix()}", f"# checksum\t{self.checksum}"]
        return "\n".join(header + body) + "\n"

    def save(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(path), encoding="utf-8")
        logger.info("📝 Manifest written: %s (%d entries, checksum %s)", path, len(self.entries), self.checksum[:12])
        return path

    @classmethod
    def load(cls, path: PathLike, verify_paths: bool = True) -> "CorpusManifest":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Manifest not found: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0].strip() != MANIFEST_MAGIC:
            raise ConfigError(f"{path} is not a manifest file")

        root = Path(".")
        seed: Optional[int] = None
        stored_checksum = None
        class_map: Dict[str, int] = {}
        entries: List[ManifestEntry] = []
        in_header = True
        for number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            fields = line.split("\t")
            key = _header_key(fields[0])
            if in_header and key in HEADER_KEYS:
                if key == "root":
                    root = Path(fields[1])
                elif key == "seed":
                    seed = int(fields[1]) if len(fields) > 1 and fields[1] else None
                elif key == "class":
                    class_map[fields[1]] = int(fields[2])
                elif key == "checksum":
                    stored_checksum = fields[1]
                continue
            # header lines end at the first entry, later "#" paths are data
            in_header = False
            if len(fields) != 3:
                raise ConfigError(f"{path}:{number}: expected 3 tab-separated fields, got {len(fields)}")
            entries.append(ManifestEntry(*fields))

        if not root.is_absolute():
            root = path.parent / root
        manifest = cls(entries, class_map, root, seed)
        if stored_checksum is not None and stored_checksum != manifest.checksum:
            raise ConfigError(f"Manifest checksum mismatch in {path}")
        if verify_paths:
            missing = [e.path for e in entries if not manifest.absolute_path(e).is_file()]
            if missing:
                raise ConfigError(f"{len(missing)} manifest paths do not exist, e.g. {missing[0]}")
        return manifest

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"CorpusManifest(entries={len(self.entries)}, classes={self.class_names}, root='{self.root}')"


def _header_key(field: str) -> Optional[str]:
    return field[1:].strip() if field.startswith("#") else None


def class_map_for(names: Iterable[str]) -> Dict[str, int]:
    """normal -> 0, remaining names alphabetically from 1"""
    names = sorted(set(names))
    ordered = ([NORMAL_CLASS_NAME] if NORMAL_CLASS_NAME in names else []) + [n for n in names if n != NORMAL_CLASS_NAME]
    return {name: index for index, name in enumerate(ordered)}
