"""Bounding-box arithmetic for face regions.

Boxes are axis-aligned with float corners (x1, y1) top-left and (x2, y2)
bottom-right in pixel coordinates. Enlargement pads every edge outward by
a fraction of the corresponding side length, so a 0.1 fraction turns a
100-pixel side into 120 pixels centered on the original box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError(f"degenerate box {self.as_tuple()}")

    def as_tuple(self):
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height


def enlarge(box: Box, fraction: float = 0.1) -> Box:
    """Pad each edge outward by ``fraction`` of its side length."""
    if fraction < 0:
        raise ValueError("fraction must be non-negative")
    pad_x = fraction * box.width
    pad_y = fraction * box.height
    return Box(box.x1 - pad_x, box.y1 - pad_y, box.x2 + pad_x, box.y2 + pad_y)


def clamp(box: Box, image_width: int, image_height: int) -> Box:
    """Clip the box to the image bounds.

    Raises ValueError if nothing of the box remains inside the image.
    """
    x1 = min(max(box.x1, 0.0), float(image_width))
    y1 = min(max(box.y1, 0.0), float(image_height))
    x2 = min(max(box.x2, 0.0), float(image_width))
    y2 = min(max(box.y2, 0.0), float(image_height))
    if not (x2 > x1 and y2 > y1):
        raise ValueError(
            f"box {box.as_tuple()} lies outside a {image_width}x{image_height} image"
        )
    return Box(x1, y1, x2, y2)


def largest(boxes) -> Box | None:
    """The box with the greatest area; ties keep the earliest one."""
    best = None
    for b in boxes:
        if best is None or b.area > best.area:
            best = b
    return best


def pixel_bounds(box: Box, image_width: int, image_height: int):
    """Integer (left, top, right, bottom) covering the box, clipped."""
    left = max(int(math.floor(box.x1)), 0)
    top = max(int(math.floor(box.y1)), 0)
    right = min(int(math.ceil(box.x2)), image_width)
    bottom = min(int(math.ceil(box.y2)), image_height)
    if right <= left or bottom <= top:
        raise ValueError(f"box {box.as_tuple()} has no pixel extent")
    return left, top, right, bottom
