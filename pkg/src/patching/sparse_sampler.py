#!/usr/bin/env python3
"""
Sparse Sampling Module

Chooses n_l patches per pyramid layer so that the union of the chosen source
footprints is as large as possible. The search space is small enough for
exhaustive enumeration; ties go to the lexicographically smallest index sequence.

Per-layer counts are n_l = ceil(m_l * alpha): alpha = 0.25 keeps 3, 1 and 1 of the
default pyramid's 12, 4 and 1 patches, and a larger alpha keeps more.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from core.errors import ConfigError, InfeasibleEnumerationError
from .geometry import PatchBox, boxes_per_layer, union_area

logger = logging.getLogger("patchlabel_sparse_sampler")

DEFAULT_MAX_COMBINATIONS = 10 ** 6


@dataclass(frozen=True)
class SamplePlan:
    """Per-layer counts and the chosen index subsets (indices are local to each layer)"""
    per_layer_counts: Tuple[int, ...]
    chosen_indices: Tuple[Tuple[int, ...], ...]
    alpha: float
    covered_area: int = 0

    def flat_indices(self, layer_sizes: Sequence[int]) -> List[int]:
        """Chosen indices as positions in the concatenated box list"""
        flat = []
        offset = 0
        for size, chosen in zip(layer_sizes, self.chosen_indices):
            flat.extend(offset + index for index in chosen)
            offset += size
        return flat


def per_layer_counts(m_per_layer: Sequence[int], alpha: float) -> List[int]:
    """n_l = ceil(m_l * alpha), clamped to [1, m_l]"""
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"Sparse sample ratio alpha must be in (0, 1], got {alpha}")
    counts = []
    for m in m_per_layer:
        # guard against 12 * 0.25 landing a hair above 3.0
        n = math.ceil(m * alpha - 1e-9)
        counts.append(min(max(n, 1), m))
    return counts


def count_combinations(m_per_layer: Sequence[int], counts: Sequence[int]) -> int:
    total = 1
    for m, n in zip(m_per_layer, counts):
        total *= math.comb(m, n)
    return total


def sparse_sample(
    boxes: Sequence[PatchBox],
    counts: Sequence[int],
    alpha: float = 1.0,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> SamplePlan:
    """Exhaustive coverage-maximising subset selection."""
    layer_sizes = boxes_per_layer(boxes)
    if len(counts) != len(layer_sizes):
        raise ConfigError(f"Got {len(counts)} counts for {len(layer_sizes)} layers")
    for m, n in zip(layer_sizes, counts):
        if not 0 <= n <= m:
            raise ConfigError(f"Cannot sample {n} of {m} patches in a layer")

    combinations = count_combinations(layer_sizes, counts)
    if combinations > max_combinations:
        raise InfeasibleEnumerationError(
            f"Sparse sampling needs {combinations} combinations (limit {max_combinations}); "
            f"choose a coarser alpha"
        )

    layer_rects: List[List[Tuple[int, int, int, int]]] = [[] for _ in layer_sizes]
    for box in boxes:
        layer_rects[box.layer].append(box.box_in_source)

    best_area = -1
    best: Tuple[Tuple[int, ...], ...] = ()
    # product of lexicographic combinations enumerates concatenated sequences in
    # lexicographic order, so keeping the first strict maximum breaks ties correctly
    per_layer_choices = [itertools.combinations(range(m), n) for m, n in zip(layer_sizes, counts)]
    for choice in itertools.product(*per_layer_choices):
        rects = [layer_rects[layer][index] for layer, chosen in enumerate(choice) for index in chosen]
        area = union_area(rects)
        if area > best_area:
            best_area = area
            best = choice

    logger.debug("Sparse plan over %d combinations covers %d px", combinations, best_area)
    return SamplePlan(
        per_layer_counts=tuple(counts),
        chosen_indices=tuple(tuple(c) for c in best),
        alpha=alpha,
        covered_area=max(best_area, 0),
    )
