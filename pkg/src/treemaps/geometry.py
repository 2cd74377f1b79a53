"""Axis-aligned rectangle primitives and the Layout container type."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with lower-left corner (x, y)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"rectangle needs positive width and height, got w={self.w}, h={self.h}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError("rectangle coordinates must be finite")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def x1(self) -> float:
        return self.x + self.w

    @property
    def y1(self) -> float:
        return self.y + self.h

    def corners(self) -> tuple[tuple[float, float], ...]:
        return ((self.x, self.y), (self.x1, self.y), (self.x1, self.y1), (self.x, self.y1))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Vec2:
    dx: float
    dy: float


@dataclass(frozen=True)
class Layout:
    """A container rectangle and one rectangle per leaf id.

    ``bundles`` groups ids that an algorithm placed as one block; ``blocks``
    holds the matching block outlines (same order).
    """

    container: Rect
    cells: Mapping[int, Rect]
    names: Mapping[int, str] = field(default_factory=dict)
    bundles: tuple[tuple[int, ...], ...] = ()
    blocks: tuple[Rect, ...] = ()

    def ids(self) -> list[int]:
        return sorted(self.cells)

    def __len__(self) -> int:
        return len(self.cells)


def aspect_ratio(r: Rect) -> float:
    return max(r.w / r.h, r.h / r.w)


def full_perimeter(r: Rect) -> float:
    """Perimeter 2(w + h)."""
    return 2.0 * (r.w + r.h)


def bounding_box(rs: Iterable[Rect]) -> Rect:
    rs = list(rs)
    if not rs:
        raise ValueError("empty set")
    x0 = min(r.x for r in rs)
    y0 = min(r.y for r in rs)
    x1 = max(r.x1 for r in rs)
    y1 = max(r.y1 for r in rs)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def point_rect_distance(px: float, py: float, r: Rect) -> float:
    dx = max(r.x - px, 0.0, px - r.x1)
    dy = max(r.y - py, 0.0, py - r.y1)
    return math.hypot(dx, dy)


def hausdorff_distance(a: Rect, b: Rect) -> float:
    """Hausdorff distance between two filled rectangles.

    Distance to a convex set is a convex function, so its maximum over a
    rectangle sits at a corner; eight point-to-rectangle distances suffice.
    """
    d_ab = max(point_rect_distance(px, py, b) for px, py in a.corners())
    d_ba = max(point_rect_distance(px, py, a) for px, py in b.corners())
    return max(d_ab, d_ba)


def overlap_area(a: Rect, b: Rect) -> float:
    ox = min(a.x1, b.x1) - max(a.x, b.x)
    oy = min(a.y1, b.y1) - max(a.y, b.y)
    if ox <= 0 or oy <= 0:
        return 0.0
    return ox * oy


def translate(layout_rects: Sequence[Rect], v: Vec2) -> list[Rect]:
    return [Rect(r.x + v.dx, r.y + v.dy, r.w, r.h) for r in layout_rects]


def translate_layout(layout: Layout, v: Vec2) -> Layout:
    cells = {i: Rect(r.x + v.dx, r.y + v.dy, r.w, r.h) for i, r in layout.cells.items()}
    blocks = tuple(translate(layout.blocks, v))
    (container,) = translate([layout.container], v)
    return Layout(container, cells, dict(layout.names), layout.bundles, blocks)


def _rot(r: Rect, c: Rect) -> Rect:
    # (x, y) -> (-y, x) about the container origin, then shift back into place
    return Rect(c.x + (c.y1 - r.y1), c.y + (r.x - c.x), r.h, r.w)


def rotate_ccw90(layout: Layout) -> Layout:
    """Rotate a layout 90 degrees counterclockwise inside its own frame.

    The container keeps its lower-left corner; widths and heights swap.
    """
    c = layout.container
    cells = {i: _rot(r, c) for i, r in layout.cells.items()}
    blocks = tuple(_rot(r, c) for r in layout.blocks)
    return Layout(Rect(c.x, c.y, c.h, c.w), cells, dict(layout.names), layout.bundles, blocks)
