#!/usr/bin/env python3
"""
Checkpoint archive: backbone and decision-network parameters plus the pipeline
configuration echo and a format version.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import torch
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from core.config import PipelineConfig
from core.errors import CheckpointError, ConfigError
from .model import PatchLabelModel, build_model

logger = logging.getLogger("patchlabel_checkpoint")

FORMAT_VERSION = 1

PathLike = Union[str, os.PathLike]


@retry(
    retry=retry_if_exception_type(OSError),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=1, max=8),
    reraise=True,
)
def _write_archive(archive: Dict[str, Any], path: Path) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(archive, tmp)
    os.replace(tmp, path)


def save_checkpoint(path: PathLike, model: PatchLabelModel, config: PipelineConfig,
                    metadata: Optional[Dict[str, Any]] = None) -> Path:
    """Write the archive atomically (retried on transient filesystem errors)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    archive = {
        'format_version': FORMAT_VERSION,
        'config': config.to_dict(),
        'backbone': model.plin.state_dict(),
        'cdn': model.cdn.state_dict(),
        'metadata': metadata or {},
    }
    _write_archive(archive, path)
    logger.debug("Checkpoint written: %s", path)
    return path


def load_checkpoint(path: PathLike, expected: Optional[PipelineConfig] = None,
                    map_location: str = "cpu") -> Tuple[PatchLabelModel, PipelineConfig, Dict[str, Any]]:
    """Load a model; verifies the format version and, if given, config compatibility"""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        archive = torch.load(path, map_location=map_location, weights_only=False)
    except Exception as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e

    if not isinstance(archive, dict) or archive.get('format_version') != FORMAT_VERSION:
        raise CheckpointError(
            f"Unsupported checkpoint format in {path}: "
            f"{archive.get('format_version') if isinstance(archive, dict) else type(archive).__name__}"
        )
    try:
        config = PipelineConfig.from_dict(archive['config'])
        config.validate_config()
    except (KeyError, ConfigError) as e:
        raise CheckpointError(f"Checkpoint {path} carries an invalid configuration: {e}") from e

    if expected is not None and not config.is_compatible(expected):
        raise CheckpointError(
            f"Checkpoint {path} was trained with {config!r}, incompatible with {expected!r}"
        )

    model = build_model(config, pretrained=False)
    try:
        model.plin.load_state_dict(archive['backbone'])
        model.cdn.load_state_dict(archive['cdn'])
    except (KeyError, RuntimeError) as e:
        raise CheckpointError(f"Checkpoint {path} parameters do not fit the model: {e}") from e
    model.eval()
    return model, config, archive.get('metadata', {})
