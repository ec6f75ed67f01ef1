#!/usr/bin/env python3
"""
Patch-level overlay export.

Each patch box is tinted in its top class colour with opacity equal to its
maximum confidence: 0 leaves the pixels unchanged and 1 paints the box solid.
The border is blended once more at the same opacity, and boxes above 0.5 get a
class tag. The sidecar lists every box's geometry followed by its confidence row.
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import cv2
import numpy as np

from corpus.images import write_image
from patching import PatchBox

PathLike = Union[str, os.PathLike]

TAG_THRESHOLD = 0.5
BORDER = 3
PALETTE = (
    (80, 200, 80), (230, 60, 60), (60, 120, 230), (240, 200, 40),
    (200, 60, 200), (40, 200, 220), (250, 140, 30), (150, 100, 60),
)

GEOMETRY_COLUMNS = ("layer", "col", "row", "x", "y", "w", "h", "source_x", "source_y", "source_w", "source_h")


def class_color(index: int) -> Tuple[int, int, int]:
    return PALETTE[index % len(PALETTE)]


@dataclass
class OverlayArtifact:
    image: np.ndarray
    boxes: Tuple[PatchBox, ...]
    confidences: np.ndarray
    class_names: List[str]

    @property
    def tagged(self) -> List[int]:
        """Indices of boxes whose top confidence exceeds the tag threshold"""
        return [i for i, row in enumerate(self.confidences) if row.max() > TAG_THRESHOLD]

    def sidecar_text(self) -> str:
        header = "\t".join(GEOMETRY_COLUMNS + tuple(self.class_names))
        lines = [header]
        for box, row in zip(self.boxes, self.confidences):
            geometry = (box.layer, box.col, box.row) + tuple(box.box_in_layer) + tuple(box.box_in_source)
            values = [str(int(v)) for v in geometry] + [f"{float(c):.6f}" for c in row]
            lines.append("\t".join(values))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: PathLike, stem: str = "overlay") -> Tuple[Path, Path]:
        out_dir = Path(out_dir)
        image_path = write_image(out_dir / f"{stem}.png", self.image)
        sidecar_path = out_dir / f"{stem}.tsv"
        sidecar_path.write_text(self.sidecar_text(), encoding="utf-8")
        return image_path, sidecar_path


def read_sidecar_boxes(path: PathLike) -> List[PatchBox]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    boxes = []
    for line in lines:
        v = [int(x) for x in line.split("\t")[:len(GEOMETRY_COLUMNS)]]
        boxes.append(PatchBox(v[0], v[1], v[2], tuple(v[3:7]), tuple(v[7:11])))
    return boxes


def _blend(region: np.ndarray, color: Tuple[int, int, int], opacity: float) -> np.ndarray:
    return (1.0 - opacity) * region + opacity * np.asarray(color, dtype=np.float32)


def render_overlay(pixels: np.ndarray, boxes: Sequence[PatchBox], confidences: np.ndarray,
                   class_names: Sequence[str]) -> OverlayArtifact:
    """``pixels`` must already be at the boxes' source resolution"""
    canvas = pixels if pixels.ndim == 3 else np.repeat(pixels[:, :, None], 3, axis=2)
    canvas = canvas.astype(np.float32)
    confidences = np.asarray(confidences, dtype=np.float64)

    # coarse boxes are drawn first
    order = sorted(range(len(boxes)), key=lambda i: -boxes[i].source_area)
    for i in order:
        x, y, w, h = boxes[i].box_in_source
        top = int(np.argmax(confidences[i]))
        confidence = float(confidences[i, top])
        color = class_color(top)
        canvas[y:y + h, x:x + w] = _blend(canvas[y:y + h, x:x + w], color, confidence)
        outline = np.zeros(canvas.shape[:2], dtype=np.uint8)
        cv2.rectangle(outline, (x, y), (x + w - 1, y + h - 1), 1, BORDER)
        mask = outline.astype(bool)
        canvas[mask] = _blend(canvas[mask], color, confidence)

    image = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
    for i in order:
        top = int(np.argmax(confidences[i]))
        confidence = float(confidences[i, top])
        if confidence > TAG_THRESHOLD:
            x, y, _, _ = boxes[i].box_in_source
            cv2.putText(image, f"{class_names[top]} {confidence:.2f}", (x + 6, y + 22),
                        cv2.FONT_HERSHEY_SIMPLEX, 0.6, class_color(top), 2, cv2.LINE_AA)
    return OverlayArtifact(image, tuple(boxes), confidences, list(class_names))
