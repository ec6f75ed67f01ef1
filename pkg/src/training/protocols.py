#!/usr/bin/env python3
"""
Evaluation protocols: single-model evaluation for I-DET / I-REC / II-REC-i and
the chained detector -> recognizer protocol (II-REC-n).
"""

import logging
import os
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config import PipelineConfig
from core.errors import CheckpointError, ConfigError
from core.types import NORMAL_CLASS_NAME, Setting
from corpus.manifest import CorpusManifest, ManifestEntry
from evaluation.report import EvaluationReport, build_report
from network.checkpoint import load_checkpoint
from network.model import PatchLabelModel
from network.predictor import Prediction, predict_manifest
from .settings import detection_scores

logger = logging.getLogger("patchlabel_protocols")

PathLike = Union[str, os.PathLike]


def mean_abs_confidence(predictions: Sequence[Prediction], normal_class: Optional[int]) -> Optional[float]:
    """Mean entrywise |S| over images whose true class is not normal"""
    values = [np.abs(p.confidences).mean() for p in predictions
              if normal_class is None or p.true_label != normal_class]
    return float(np.mean(values)) if values else None


def evaluate_model(model: PatchLabelModel, config: PipelineConfig, manifest: CorpusManifest,
                   setting: Setting, entries: Optional[Sequence[ManifestEntry]] = None,
                   batch_size: int = 8, workers: int = 0) -> Tuple[EvaluationReport, List[Prediction]]:
    """Report for a model on manifest entries (defaults to the test split)"""
    entries = manifest.split("test") if entries is None else list(entries)
    if not entries:
        raise ConfigError("No entries to evaluate")
    if manifest.class_names != list(config.class_names):
        raise CheckpointError(
            f"Model classes {list(config.class_names)} do not match manifest classes {manifest.class_names}"
        )
    predictions = predict_manifest(model, config, manifest, entries, batch_size, workers)
    probabilities = np.stack([p.probabilities for p in predictions])
    scores = detection_scores(probabilities, config.normal_class) if config.normal_class is not None else None
    extras = {}
    mean_abs = mean_abs_confidence(predictions, config.normal_class)
    if mean_abs is not None:
        extras['mean_abs_s_distressed'] = mean_abs
    report = build_report(
        [p.label for p in predictions], [p.true_label for p in predictions], setting,
        config.class_names, config.normal_class, scores, extras,
    )
    return report, predictions


def combine_two_stage(detector_flags: Sequence[bool], recognize: Callable[[List[int]], Sequence[int]],
                      normal_index: int) -> np.ndarray:
    """Final labels: normal where the detector says normal, recognizer labels elsewhere.

    ``detector_flags[i]`` is True when image i was detected as distressed;
    ``recognize`` receives those indices and returns labels in the final space.
    The recognizer is not called when nothing is flagged.
    """
    flags = np.asarray(detector_flags, dtype=bool)
    final = np.full(len(flags), normal_index, dtype=np.int64)
    flagged = np.flatnonzero(flags).tolist()
    if flagged:
        final[flagged] = np.asarray(recognize(flagged), dtype=np.int64)
    return final


def evaluate_two_stage(detector_ckpt: PathLike, recognizer_ckpt: PathLike, test_manifest: CorpusManifest,
                       split: Optional[str] = "test", batch_size: int = 8, workers: int = 0) -> EvaluationReport:
    """Chain an i-det detector and an ii-rec-i recognizer over the full test set"""
    detector, detector_config, _ = load_checkpoint(detector_ckpt)
    recognizer, recognizer_config, _ = load_checkpoint(recognizer_ckpt)
    if detector_config.num_classes != 2 or detector_config.normal_class is None:
        raise CheckpointError(f"{detector_ckpt} is not a binary detector checkpoint")
    if recognizer_config.normal_class is not None:
        raise CheckpointError(f"{recognizer_ckpt} is not a distressed-only (ii-rec-i) recognizer")

    normal_index = test_manifest.normal_class
    if normal_index is None:
        raise ConfigError(f"The two-stage test manifest needs a '{NORMAL_CLASS_NAME}' class")
    name_to_final = test_manifest.class_map
    unknown = [name for name in recognizer_config.class_names if name not in name_to_final]
    if unknown:
        raise CheckpointError(f"Recognizer classes {unknown} are not in the test manifest")
    recognizer_to_final = np.array([name_to_final[name] for name in recognizer_config.class_names])

    entries = test_manifest.split(split) if split else list(test_manifest.entries)
    if not entries:
        raise ConfigError("No entries to evaluate")

    detector_names = list(detector_config.class_names)
    detector_normal = detector_names[detector_config.normal_class]
    detector_distressed = detector_names[1 - detector_config.normal_class]
    detector_view = CorpusManifest(
        [ManifestEntry(e.path, detector_normal if e.class_name == NORMAL_CLASS_NAME else detector_distressed, e.split)
         for e in entries],
        {name: index for index, name in enumerate(detector_names)},
        test_manifest.root, test_manifest.seed,
    )
    detections = predict_manifest(detector, detector_config, detector_view, None, batch_size, workers)
    flags = [p.label != detector_config.normal_class for p in detections]

    def recognize(indices: List[int]) -> np.ndarray:
        subset = [entries[i] for i in indices]
        view = CorpusManifest(
            [ManifestEntry(e.path, recognizer_config.class_names[0], e.split) for e in subset],
            {name: index for index, name in enumerate(recognizer_config.class_names)},
            test_manifest.root, test_manifest.seed,
        )
        labels = [p.label for p in predict_manifest(recognizer, recognizer_config, view, None, batch_size, workers)]
        return recognizer_to_final[labels]

    final = combine_two_stage(flags, recognize, normal_index)
    actual = [test_manifest.label_of(e) for e in entries]
    probabilities = np.stack([p.probabilities for p in detections])
    scores = detection_scores(probabilities, detector_config.normal_class)
    logger.info("Two-stage: detector flagged %d of %d images", int(np.sum(flags)), len(entries))
    return build_report(final, actual, Setting.II_REC_N, test_manifest.class_names, normal_index, scores,
                        {'flagged_fraction': float(np.mean(flags))})
