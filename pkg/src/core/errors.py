#!/usr/bin/env python3
"""
Exception hierarchy for the patch label pipeline.

Every error carries the process exit code the command line surface reports for it.
"""

from typing import Optional


class PatchLabelError(Exception):
    """Base class for all pipeline errors"""

    exit_code = 1


class UsageError(PatchLabelError):
    """Invalid command line usage or flag combination"""

    exit_code = 2


class ConfigError(PatchLabelError, ValueError):
    """Invalid configuration, manifest or setting"""

    exit_code = 3


class InvalidGeometryError(ConfigError):
    """Image or layer smaller than the patch window, or a malformed pyramid"""


class InfeasibleEnumerationError(ConfigError):
    """Sparse sampling would have to enumerate more combinations than allowed"""


class IngestionError(ConfigError):
    """Corpus directory cannot be turned into a manifest"""


class CheckpointError(PatchLabelError):
    """Missing, unreadable or incompatible checkpoint"""

    exit_code = 3


class ShapeError(PatchLabelError, ValueError):
    """Tensor or matrix dimensions do not match the model"""


class LabelError(PatchLabelError, ValueError):
    """Label vector is not one-hot or refers to an unknown class"""


class UndefinedMetricError(PatchLabelError, ValueError):
    """Metric is undefined for the given samples (e.g. a single class)"""


class SynthesisError(PatchLabelError, ValueError):
    """Normal-image synthesis cannot be performed for the given mask"""


class DivergenceError(PatchLabelError):
    """Training produced a non-finite loss"""

    exit_code = 4

    def __init__(self, message: str, last_good_checkpoint: Optional[str] = None):
        super().__init__(message)
        self.last_good_checkpoint = last_good_checkpoint
