#!/usr/bin/env python3
"""
Application settings and the manifest views they train on.

I-DET collapses every distress type into one ``distressed`` class; I-REC keeps
normal plus all distress types; II-REC-i sees distressed images only, with the
distress types re-indexed from 0. II-REC-n is an evaluation protocol chaining an
I-DET detector with a II-REC-i recognizer and has no training view.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.errors import ConfigError
from core.types import DISTRESSED_CLASS_NAME, NORMAL_CLASS_NAME, Setting
from corpus.manifest import CorpusManifest, ManifestEntry

logger = logging.getLogger("patchlabel_settings")


def _require_normal(manifest: CorpusManifest, setting: Setting) -> None:
    if manifest.normal_class is None:
        raise ConfigError(f"Setting {setting.value} needs a '{NORMAL_CLASS_NAME}' class in the manifest")


def derive_setting_view(manifest: CorpusManifest, setting: Setting) -> CorpusManifest:
    """Manifest relabeled for a training setting"""
    setting = Setting.parse(setting)
    if setting is Setting.II_REC_N:
        raise ConfigError("ii-rec-n is an evaluation protocol; train an i-det detector and an ii-rec-i recognizer")

    if setting is Setting.I_DET:
        _require_normal(manifest, setting)
        entries = [
            e if e.class_name == NORMAL_CLASS_NAME else ManifestEntry(e.path, DISTRESSED_CLASS_NAME, e.split)
            for e in manifest.entries
        ]
        class_map = {NORMAL_CLASS_NAME: 0, DISTRESSED_CLASS_NAME: 1}
    elif setting is Setting.I_REC:
        _require_normal(manifest, setting)
        entries, class_map = manifest.entries, manifest.class_map
    else:
        entries = [e for e in manifest.entries if e.class_name != NORMAL_CLASS_NAME]
        kept = [name for name in manifest.class_names if name != NORMAL_CLASS_NAME]
        class_map = {name: index for index, name in enumerate(kept)}

    if not entries:
        raise ConfigError(f"Setting {setting.value} leaves no entries in the manifest")
    view = CorpusManifest(entries, class_map, manifest.root, manifest.seed)
    logger.info("Setting %s view: %d entries, classes %s", setting.value, len(view), view.class_names)
    return view


@dataclass
class SettingSpec:
    """A setting bound to the manifest view it trains and evaluates on"""
    setting: Setting
    manifest: CorpusManifest

    @property
    def class_names(self) -> List[str]:
        return self.manifest.class_names

    @property
    def num_classes(self) -> int:
        return self.manifest.num_classes

    @property
    def normal_class(self) -> Optional[int]:
        return self.manifest.normal_class

    def validate(self) -> None:
        if self.setting is Setting.II_REC_N:
            raise ConfigError("ii-rec-n has no training view")
        if self.setting is Setting.I_DET and self.num_classes != 2:
            raise ConfigError(f"i-det needs exactly 2 classes, got {self.num_classes}")
        if self.setting is Setting.II_REC_I:
            if self.normal_class is not None:
                raise ConfigError("ii-rec-i manifests cannot contain the normal class")
        elif self.normal_class is None:
            raise ConfigError(f"{self.setting.value} needs a normal class")
        if self.num_classes < 2:
            raise ConfigError(f"{self.setting.value} needs at least 2 classes, got {self.num_classes}")

    @classmethod
    def from_manifest(cls, manifest: CorpusManifest, setting: Setting) -> "SettingSpec":
        """Bind a loaded manifest to a setting.

        i-det relabels multi-class manifests; ii-rec-i refuses manifests holding
        normal images (derive the view first).
        """
        setting = Setting.parse(setting)
        if setting is Setting.II_REC_I:
            if any(e.class_name == NORMAL_CLASS_NAME for e in manifest.entries):
                raise ConfigError(
                    "ii-rec-i training manifest contains normal images; derive the ii-rec-i view first"
                )
            if manifest.normal_class is not None:
                manifest = derive_setting_view(manifest, setting)
        elif setting is Setting.I_DET:
            if manifest.class_names != [NORMAL_CLASS_NAME, DISTRESSED_CLASS_NAME]:
                manifest = derive_setting_view(manifest, setting)
        spec = cls(setting, manifest)
        spec.validate()
        return spec


def detection_scores(probabilities: np.ndarray, normal_class: Optional[int]) -> np.ndarray:
    """Distressed score 1 - p(normal) per row"""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if normal_class is None:
        raise ConfigError("Detection scores need a normal class")
    return np.clip(1.0 - probabilities[:, normal_class], 0.0, 1.0)
