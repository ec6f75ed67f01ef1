#!/usr/bin/env python3
"""
Patch Geometry Module

Slide-window grids and multi-layer image pyramids. All functions are pure and
return boxes in a deterministic order: layer by layer, rows outer, columns inner.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from core.errors import InvalidGeometryError

logger = logging.getLogger("patchlabel_geometry")

Box = Tuple[int, int, int, int]
Dims = Tuple[int, int]


@dataclass(frozen=True)
class PatchBox:
    """One patch window.

    ``box_in_layer`` is (x, y, w, h) in the resized layer, ``box_in_source`` the same
    window mapped back to original image coordinates.
    """
    layer: int
    col: int
    row: int
    box_in_layer: Box
    box_in_source: Box

    @property
    def source_area(self) -> int:
        return self.box_in_source[2] * self.box_in_source[3]


@dataclass(frozen=True)
class PyramidSpec:
    """Layer resolutions (width, height) from full resolution down, plus window and stride"""
    layer_resolutions: Tuple[Dims, ...] = ((1200, 900), (600, 600), (300, 300))
    window_size: int = 300
    stride: int = 300

    def __post_init__(self):
        # normalise lists coming from config parsing into hashable tuples
        object.__setattr__(
            self, "layer_resolutions",
            tuple((int(w), int(h)) for w, h in self.layer_resolutions)
        )

    @property
    def source_dims(self) -> Dims:
        return self.layer_resolutions[0]

    @property
    def num_layers(self) -> int:
        return len(self.layer_resolutions)

    def first_layer_only(self) -> "PyramidSpec":
        """Single-layer spec used by the slide window strategy"""
        return PyramidSpec(self.layer_resolutions[:1], self.window_size, self.stride)

    def validate(self) -> None:
        if not self.layer_resolutions:
            raise InvalidGeometryError("Pyramid needs at least one layer")
        if self.window_size <= 0:
            raise InvalidGeometryError(f"Window size must be positive: {self.window_size}")
        if self.stride <= 0:
            raise InvalidGeometryError(f"Stride must be positive: {self.stride}")
        for width, height in self.layer_resolutions:
            if width < self.window_size or height < self.window_size:
                raise InvalidGeometryError(
                    f"Layer {width}x{height} is smaller than the {self.window_size}px window"
                )

    def to_text(self) -> str:
        layers = ",".join(f"{w}x{h}" for w, h in self.layer_resolutions)
        return f"{layers}@{self.window_size}/{self.stride}"

    @classmethod
    def parse_layers(cls, text: str) -> Tuple[Dims, ...]:
        """Parse ``1200x900,600x600,300x300``"""
        layers = []
        for chunk in text.split(","):
            chunk = chunk.strip().lower()
            if not chunk:
                continue
            try:
                width, height = chunk.split("x")
                layers.append((int(width), int(height)))
            except ValueError:
                raise InvalidGeometryError(f"Cannot parse layer resolution '{chunk}'")
        return tuple(layers)


DEFAULT_PYRAMID = PyramidSpec()


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def slide_window(image_dims: Dims, window: int, stride: int, layer: int = 0) -> List[PatchBox]:
    """Non-overlapping (for stride == window) grid of square windows.

    Trailing margins smaller than the window are discarded.
    """
    width, height = int(image_dims[0]), int(image_dims[1])
    if stride <= 0:
        raise InvalidGeometryError(f"Stride must be positive: {stride}")
    if window <= 0 or window > min(width, height):
        raise InvalidGeometryError(
            f"Window {window} does not fit into a {width}x{height} image"
        )

    columns = (width - window) // stride + 1
    rows = (height - window) // stride + 1
    boxes = []
    for row in range(rows):
        for col in range(columns):
            box = (col * stride, row * stride, window, window)
            boxes.append(PatchBox(layer=layer, col=col, row=row, box_in_layer=box, box_in_source=box))
    return boxes


def map_to_source(box: Box, layer_dims: Dims, source_dims: Dims) -> Box:
    """Scale a layer box to source coordinates per axis, round and clamp to the source extent"""
    scale_x = source_dims[0] / layer_dims[0]
    scale_y = source_dims[1] / layer_dims[1]
    x, y, w, h = box
    x0 = min(max(_round_half_up(x * scale_x), 0), source_dims[0])
    y0 = min(max(_round_half_up(y * scale_y), 0), source_dims[1])
    x1 = min(max(_round_half_up((x + w) * scale_x), 0), source_dims[0])
    y1 = min(max(_round_half_up((y + h) * scale_y), 0), source_dims[1])
    return (x0, y0, x1 - x0, y1 - y0)


def pyramid_patches(image_dims: Dims, spec: PyramidSpec) -> List[PatchBox]:
    """Concatenate the slide-window grids of every pyramid layer, tagged with the layer id"""
    spec.validate()
    source_dims = (int(image_dims[0]), int(image_dims[1]))
    boxes: List[PatchBox] = []
    for layer, layer_dims in enumerate(spec.layer_resolutions):
        for box in slide_window(layer_dims, spec.window_size, spec.stride, layer=layer):
            boxes.append(PatchBox(
                layer=layer,
                col=box.col,
                row=box.row,
                box_in_layer=box.box_in_layer,
                box_in_source=map_to_source(box.box_in_layer, layer_dims, source_dims),
            ))
    logger.debug("Pyramid %s on %dx%d -> %d boxes", spec.to_text(), source_dims[0], source_dims[1], len(boxes))
    return boxes


def boxes_per_layer(boxes: Sequence[PatchBox]) -> List[int]:
    """m_l for every layer present, in layer order"""
    counts: List[int] = []
    for box in boxes:
        while len(counts) <= box.layer:
            counts.append(0)
        counts[box.layer] += 1
    return counts


def union_area(rects: Sequence[Box]) -> int:
    """Exact area of a union of axis-aligned rectangles via coordinate compression"""
    rects = [r for r in rects if r[2] > 0 and r[3] > 0]
    if not rects:
        return 0
    xs = sorted({r[0] for r in rects} | {r[0] + r[2] for r in rects})
    area = 0
    for left, right in zip(xs, xs[1:]):
        intervals = sorted(
            (r[1], r[1] + r[3]) for r in rects if r[0] <= left and r[0] + r[2] >= right
        )
        covered = 0
        current_start = current_end = None
        for start, end in intervals:
            if current_end is None or start > current_end:
                if current_end is not None:
                    covered += current_end - current_start
                current_start, current_end = start, end
            else:
                current_end = max(current_end, end)
        if current_end is not None:
            covered += current_end - current_start
        area += covered * (right - left)
    return area
