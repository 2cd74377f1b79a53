"""Shared strategies, instance generators and layout checks for the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np
from hypothesis import strategies as st

from treemaps.geometry import Layout, Rect, overlap_area
from treemaps.treemodel import AreaList

RANDOM = [0.1277, 0.0837, 0.0922, 0.2235, 0.2845, 0.0994, 0.0890]
EXTREME = [0.0795, 0.0709, 0.1074, 0.1121, 0.3980, 0.1023, 0.1298]
UNIT = Rect(0.0, 0.0, 1.0, 1.0)


@st.composite
def rects(draw, lo=-10.0, hi=10.0, min_side=0.01, max_side=10.0):
    x = draw(st.floats(lo, hi))
    y = draw(st.floats(lo, hi))
    w = draw(st.floats(min_side, max_side))
    h = draw(st.floats(min_side, max_side))
    return Rect(x, y, w, h)


@st.composite
def area_lists(draw, min_n=1, max_n=12, total=1.0, spread=50.0):
    n = draw(st.integers(min_n, max_n))
    raw = draw(st.lists(st.floats(1.0, spread), min_size=n, max_size=n))
    s = math.fsum(raw)
    return AreaList.from_values([total * v / s for v in raw])


def random_areas(rng: np.random.Generator, n: int, total: float = 1.0, lo: float = 0.05) -> AreaList:
    v = rng.uniform(lo, 1.0, n)
    v = v * (total / v.sum())
    return AreaList.from_values([float(a) for a in v])


def internal(layout: Layout) -> float:
    """Sum of w + h over the cells."""
    return math.fsum(r.w + r.h for r in layout.cells.values())


def assert_partition(layout: Layout, areas: AreaList, tol: float = 1e-9, inside: bool = True) -> None:
    """Cells match requested areas, do not overlap, and fill the container."""
    c = layout.container
    assert set(layout.cells) == set(areas.ids)
    for i, a in zip(areas.ids, areas.areas):
        r = layout.cells[i]
        assert abs(r.area - a) <= tol * max(1.0, a) * 10, (i, r.area, a)
        if inside:
            e = tol * max(c.w, c.h) * 10
            assert r.x >= c.x - e and r.y >= c.y - e
            assert r.x1 <= c.x1 + e and r.y1 <= c.y1 + e
    assert abs(math.fsum(r.area for r in layout.cells.values()) - c.area) <= tol * c.area * 10
    cells = list(layout.cells.values())
    for a, b in itertools.combinations(cells, 2):
        assert overlap_area(a, b) < 1e-9 * c.area
