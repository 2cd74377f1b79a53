import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treemaps.geometry import Rect, aspect_ratio, bounding_box, overlap_area
from treemaps.metrics import layout_metrics
from treemaps.spiral import (PHI, SpiralConfig, SpiralUsageError, layout_hierarchy, square_bundle_spiral,
                             strip_bundle_spiral, symmetric_spiral)
from treemaps.subdivision import squarified
from treemaps.treemodel import AreaList, WeightedTree, parse_tree
from helpers import UNIT, area_lists, assert_partition, random_areas

SPIRALS = [symmetric_spiral, square_bundle_spiral, strip_bundle_spiral]


def vals(*xs):
    return AreaList.from_values(xs)


def close(r, x, y, w, h):
    return r.as_tuple() == pytest.approx((x, y, w, h), abs=1e-12)


def test_config_validates():
    with pytest.raises(ValueError):
        SpiralConfig(0.5)
    SpiralConfig(PHI)


@pytest.mark.parametrize("fn", SPIRALS)
def test_empty_and_container_rejected(fn):
    with pytest.raises(ValueError):
        fn(AreaList((), ()))
    with pytest.raises(SpiralUsageError):
        fn(vals(1.0), container=UNIT)


def test_symmetric_two_unit_squares():
    lay = symmetric_spiral(vals(1, 1), SpiralConfig(2))
    assert (lay.container.w, lay.container.h) == pytest.approx((2, 1))
    assert all(close(r, r.x, r.y, 1, 1) for r in lay.cells.values())


def test_symmetric_three():
    lay = symmetric_spiral(vals(1, 1, 2), SpiralConfig(2))
    assert (lay.container.w, lay.container.h) == pytest.approx((2, 2))
    assert close(lay.cells[2], 0, 1, 2, 1)


def test_symmetric_four():
    lay = symmetric_spiral(vals(1, 1, 2, 4), SpiralConfig(2))
    assert (lay.container.w, lay.container.h) == pytest.approx((4, 2))
    assert close(lay.cells[3], 2, 0, 2, 2)


def test_square_bundle_six_unit_squares():
    lay = square_bundle_spiral(vals(*[1] * 6), SpiralConfig(2))
    assert (lay.container.w, lay.container.h) == pytest.approx((3, 2))
    assert all(aspect_ratio(r) == pytest.approx(1) for r in lay.cells.values())
    assert len(lay.bundles) == 1 and len(lay.bundles[0]) == 4
    b = lay.blocks[0]
    assert (b.area) == pytest.approx(4) and aspect_ratio(b) == pytest.approx(1)


def test_strip_four_unit_squares():
    lay = strip_bundle_spiral(vals(1, 1, 1, 1), SpiralConfig(2))
    assert (lay.container.w, lay.container.h) == pytest.approx((2, 2))
    assert all(aspect_ratio(r) == pytest.approx(1) for r in lay.cells.values())
    assert lay.bundles == ((2, 3),)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.sampled_from([2.0, PHI]))
def test_two_areas_all_identical(a, b, rho):
    lays = [fn(vals(a, b), SpiralConfig(rho)) for fn in SPIRALS]
    for lay in lays[1:]:
        assert lay.cells == lays[0].cells and lay.container == lays[0].container
    c = lays[0].container
    assert max(c.w, c.h) / min(c.w, c.h) == pytest.approx(rho)


@pytest.mark.parametrize("rho", [2.0, PHI])
def test_single_area_cell_is_container(rho):
    lay = symmetric_spiral(vals(3.0), SpiralConfig(rho))
    c = lay.container
    assert lay.cells[0] == c
    assert c.w / c.h == pytest.approx(rho) and c.area == pytest.approx(3.0)


@settings(max_examples=60, deadline=None)
@given(area_lists(max_n=40, spread=200), st.sampled_from(SPIRALS), st.sampled_from([2.0, PHI]))
def test_spiral_invariants(areas, fn, rho):
    steps = []

    def check(state):
        u = state.union_box
        placed = math.fsum(b[2] * b[3] for _, b in state.placed)
        assert u[2] * u[3] == pytest.approx(placed, rel=1e-9)
        bb = bounding_box(Rect(*b) for _, b in state.placed)
        assert bb.as_tuple() == pytest.approx(u, rel=1e-9, abs=1e-12)
        steps.append(len(state.placed))

    lay = fn(areas, SpiralConfig(rho), on_place=check)
    assert steps[-1] == len(areas)
    assert steps == sorted(steps)
    c = lay.container
    assert c.w >= c.h
    assert bounding_box(lay.cells.values()).as_tuple() == pytest.approx(c.as_tuple(), rel=1e-9, abs=1e-12)
    assert_partition(lay, areas)


@settings(max_examples=30, deadline=None)
@given(area_lists(min_n=3, max_n=30))
def test_bundles_cover_every_later_cell(areas):
    for fn in (square_bundle_spiral, strip_bundle_spiral):
        lay = fn(areas)
        covered = sorted(i for b in lay.bundles for i in b)
        assert len(covered) == len(set(covered)) == len(areas) - 2
        for ids, block in zip(lay.bundles, lay.blocks):
            assert bounding_box(lay.cells[i] for i in ids).as_tuple() == pytest.approx(block.as_tuple(), abs=1e-9)


def test_strip_slicing_is_sequential():
    lay = strip_bundle_spiral(vals(*[1.0] * 12))
    for ids, block in zip(lay.bundles, lay.blocks):
        for a, b in zip(ids, ids[1:]):
            assert overlap_area(lay.cells[a], lay.cells[b]) == 0
        # cells span the strip across its thickness
        rows = all(lay.cells[i].h == pytest.approx(block.h) for i in ids)
        cols = all(lay.cells[i].w == pytest.approx(block.w) for i in ids)
        assert rows or cols


def test_square_bundle_sixty_leaf_regime():
    rng = np.random.default_rng(60)
    worst = [layout_metrics(square_bundle_spiral(random_areas(rng, 60, lo=0.01))).max_ar for _ in range(100)]
    assert all(w >= 1 for w in worst)
    assert 1 <= float(np.median(worst)) <= 5


def test_large_input_runs():
    lay = strip_bundle_spiral(random_areas(np.random.default_rng(1), 10_000))
    assert len(lay.cells) == 10_000


# ---------------------------------------------------------------- hierarchy

@st.composite
def trees(draw):
    groups = draw(st.lists(st.lists(st.floats(0.1, 5), min_size=1, max_size=5), min_size=1, max_size=4))
    kids = [WeightedTree(f"g{g}", 0.0, [WeightedTree(f"l{g}.{k}", w, []) for k, w in enumerate(ws)])
            for g, ws in enumerate(groups)]
    from treemaps.treemodel import serialize_tree
    return parse_tree(serialize_tree(WeightedTree("root", 0.0, kids)))


def test_height_one_matches_flat():
    t = parse_tree("a,0.5\nb,0.3\nc,0.2", format="csv")
    flat = squarified(UNIT, AreaList.from_values([0.5, 0.3, 0.2]))
    assert layout_hierarchy(t, "squarified", UNIT).flatten().cells == flat.cells
    sp = symmetric_spiral(AreaList.from_values([0.5, 0.3, 0.2]))
    assert layout_hierarchy(t, "sspiral").flatten().cells == sp.cells


def test_hierarchy_usage_errors():
    t = parse_tree("a,1", format="csv")
    with pytest.raises(SpiralUsageError):
        layout_hierarchy(t, "sqbundle", UNIT)
    with pytest.raises(ValueError):
        layout_hierarchy(t, "dp")


@settings(max_examples=30, deadline=None)
@given(trees(), st.sampled_from(["squarified", "dc", "mdc", "dp"]))
def test_subdivision_hierarchy_partitions_children(t, algo):
    box = Rect(0, 0, 2, 1)
    nested = layout_hierarchy(t, algo, box)
    f = t.weight
    for node, src in zip(nested.children, t.children):
        got = math.fsum(c.rect.area for c in node.children)
        assert got == pytest.approx(node.rect.area, rel=1e-9)
        assert node.rect.area == pytest.approx(box.area * src.weight / f, rel=1e-9)
        for c in node.children:
            r = c.rect
            assert r.x >= node.rect.x - 1e-9 and r.x1 <= node.rect.x1 + 1e-9
            assert r.y >= node.rect.y - 1e-9 and r.y1 <= node.rect.y1 + 1e-9


@settings(max_examples=30, deadline=None)
@given(trees(), st.sampled_from(["sspiral", "sqbundle", "stbundle"]))
def test_spiral_hierarchy_preserves_areas(t, algo):
    flat = layout_hierarchy(t, algo).flatten()
    for leaf in t.leaves():
        assert flat.cells[leaf.id].area == pytest.approx(leaf.weight, rel=1e-9)
    assert flat.container.area == pytest.approx(t.weight, rel=1e-9)
    cells = list(flat.cells.values())
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            assert overlap_area(cells[i], cells[j]) < 1e-9 * flat.container.area
