import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treemaps.algorithms import run_algorithm
from treemaps.geometry import Layout, Rect, Vec2, aspect_ratio, rotate_ccw90, translate_layout
from treemaps.metrics import (REPORT_COLUMNS, layout_metrics, perturb_areas, round_rng, stability_between,
                              stability_study)
from treemaps.subdivision import dynamic_prog, squarified
from treemaps.treemodel import AreaList
from helpers import RANDOM, UNIT, area_lists
from test_geometry import grid_hausdorff


def test_single_cell_metrics():
    m = layout_metrics(Layout(UNIT, {0: UNIT}))
    assert (m.total_perimeter, m.max_ar, m.avg_ar, m.awar) == (4, 1, 1, 1)


def test_two_halves_metrics():
    m = layout_metrics(Layout(UNIT, {0: Rect(0, 0, 0.5, 1), 1: Rect(0.5, 0, 0.5, 1)}))
    assert (m.total_perimeter, m.max_ar, m.avg_ar, m.awar) == (6.0, 2, 2, 2)


def test_random_instance_dp_perimeter():
    m = layout_metrics(dynamic_prog(UNIT, AreaList.from_values(RANDOM)))
    assert m.total_perimeter == pytest.approx(10.4649, abs=1e-3)


def test_empty_layout_rejected():
    with pytest.raises(ValueError):
        layout_metrics(Layout(UNIT, {}))


@settings(max_examples=50, deadline=None)
@given(area_lists(max_n=10), st.sampled_from(["squarified", "dc", "dp", "sqbundle"]))
def test_metric_invariants(areas, algo):
    lay = run_algorithm(algo, areas, None if algo == "sqbundle" else UNIT)
    m = layout_metrics(lay)
    ars = [aspect_ratio(r) for r in lay.cells.values()]
    assert m.max_ar >= m.avg_ar - 1e-12 and m.avg_ar >= 1
    assert m.max_ar >= m.awar - 1e-12 and m.awar >= 1
    assert min(ars) - 1e-12 <= m.awar <= max(ars) + 1e-12
    assert m.total_perimeter >= 4 * math.fsum(math.sqrt(a) for a in areas.areas) - 1e-9
    for other in (rotate_ccw90(lay), translate_layout(lay, Vec2(3, -2))):
        o = layout_metrics(other)
        assert o.total_perimeter == pytest.approx(m.total_perimeter, rel=1e-12)
        assert o.max_ar == pytest.approx(m.max_ar, rel=1e-9)
        assert o.avg_ar == pytest.approx(m.avg_ar, rel=1e-9)
        assert o.awar == pytest.approx(m.awar, rel=1e-9)
    assert stability_between(lay, lay) == (0, 0)


def test_perturb_level_zero_identity():
    a = AreaList.from_values(RANDOM)
    assert perturb_areas(a, 0.0, np.random.default_rng(1)).areas == a.areas


@given(area_lists(), st.floats(0, 0.5), st.integers(0, 2**32 - 1))
def test_perturb_keeps_total_and_is_deterministic(areas, level, seed):
    p = perturb_areas(areas, level, np.random.default_rng(seed))
    q = perturb_areas(areas, level, np.random.default_rng(seed))
    assert p == q
    assert p.ids == areas.ids
    assert math.fsum(p.areas) == pytest.approx(areas.total, abs=1e-12)


def test_perturb_negative_level():
    with pytest.raises(ValueError):
        perturb_areas(AreaList.from_values([1.0]), -0.1, np.random.default_rng(0))


def test_stability_single_moved_cell():
    cells = {i: Rect(i, 0, 1, 1) for i in range(4)}
    a = Layout(Rect(0, 0, 4, 1), cells)
    moved = dict(cells)
    moved[2] = Rect(3, 0, 1, 1)
    b = Layout(Rect(0, 0, 4, 1), moved)
    assert stability_between(a, b, align=False) == (1, 0.25)


def test_stability_id_mismatch():
    with pytest.raises(ValueError):
        stability_between(Layout(UNIT, {0: UNIT}), Layout(UNIT, {1: UNIT}))


def test_stability_alignment_removes_offset():
    a = Layout(UNIT, {0: UNIT})
    b = translate_layout(a, Vec2(5, 5))
    assert stability_between(a, b) == (0, 0)
    assert stability_between(a, b, align=False)[0] == pytest.approx(5 * math.sqrt(2))


def test_stability_matches_grid_oracle():
    rng = np.random.default_rng(3)
    areas = AreaList.from_values(RANDOM)
    a = squarified(UNIT, areas)
    b = squarified(UNIT, perturb_areas(areas, 0.1, rng))
    hds = [grid_hausdorff(a.cells[i], b.cells[i], 2e-3) for i in a.ids()]
    mx, avg = stability_between(a, b)
    assert mx == pytest.approx(max(hds), abs=3e-3)
    assert avg == pytest.approx(sum(hds) / len(hds), abs=3e-3)


def test_study_level_zero_all_zero():
    r = stability_study("squarified", AreaList.from_values(RANDOM), levels=[0.0], rounds=1, container=UNIT)
    assert r.levels[0].max_hd == 0 and r.levels[0].avg_hd == 0


def test_study_deterministic_and_columns():
    a = AreaList.from_values(RANDOM)
    r1 = stability_study("squarified", a, seed=11, container=UNIT)
    r2 = stability_study("squarified", a, seed=11, container=UNIT)
    assert r1.to_json() == r2.to_json() and r1.to_csv() == r2.to_csv()
    assert r1.to_csv().splitlines()[0] == ",".join(REPORT_COLUMNS)
    assert len(r1.rows()) == 3


def test_study_needs_rounds():
    with pytest.raises(ValueError):
        stability_study("squarified", AreaList.from_values(RANDOM), rounds=0)


def test_study_squarified_monotone_on_average():
    a = AreaList.from_values(RANDOM)
    sums = np.zeros(3)
    for seed in range(100):
        r = stability_study("squarified", a, rounds=10, seed=seed, container=UNIT)
        vals = [lv.avg_hd for lv in r.levels]
        assert all(math.isfinite(v) and v >= 0 for v in vals)
        assert all(lv.max_hd >= lv.avg_hd for lv in r.levels)
        sums += vals
    assert sums[0] > 0
    assert sums[0] <= sums[1] <= sums[2]


def test_study_accepts_callable():
    r = stability_study(lambda al: squarified(UNIT, al), AreaList.from_values(RANDOM), rounds=2)
    assert r.n == 7 and len(r.levels) == 3


def test_round_rng_independent():
    x = round_rng(0, 0, 0).random()
    assert x == round_rng(0, 0, 0).random()
    assert x != round_rng(0, 0, 1).random()
    assert x != round_rng(0, 1, 0).random()
