"""
Patch collection package: slide window, image pyramid and sparse sampling
"""

from .geometry import (
    DEFAULT_PYRAMID,
    PatchBox,
    PyramidSpec,
    boxes_per_layer,
    map_to_source,
    pyramid_patches,
    slide_window,
    union_area,
)
from .sparse_sampler import SamplePlan, per_layer_counts, sparse_sample
from .extractor import PatchSet, extract_patches, plan_boxes, resize_to

__all__ = [
    'DEFAULT_PYRAMID',
    'PatchBox',
    'PyramidSpec',
    'boxes_per_layer',
    'map_to_source',
    'pyramid_patches',
    'slide_window',
    'union_area',
    'SamplePlan',
    'per_layer_counts',
    'sparse_sample',
    'PatchSet',
    'extract_patches',
    'plan_boxes',
    'resize_to',
]
