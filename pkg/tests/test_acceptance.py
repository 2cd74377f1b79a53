"""End-to-end acceptance checks, one test per criterion, each printing a pass/fail line."""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import treemaps
from treemaps.algorithms import SPIRALS, run_algorithm
from treemaps.geometry import Rect, aspect_ratio, hausdorff_distance
from treemaps.metrics import layout_metrics, stability_study
from treemaps.optimizer import ModelParams, SolveConfig, build_model, check_feasibility, lower_bound, solve
from treemaps.spiral import PHI, SpiralConfig, square_bundle_spiral, strip_bundle_spiral, symmetric_spiral
from treemaps.subdivision import (SplitConstant, dc_baseline, dynamic_prog, modified_dc, slicing_oracle,
                                  squarified)
from treemaps.treemodel import AreaList
from acceptance_log import report
from helpers import EXTREME, RANDOM, UNIT, internal, random_areas
from test_geometry import grid_hausdorff

DATA = Path(treemaps.__file__).parent / "data"


def check(number, ok, detail):
    report(number, ok, detail)
    assert ok, detail


# 1 -------------------------------------------------------------------------

def test_criterion_1_golden_perimeters():
    t0 = time.monotonic()
    want = {
        "random": (RANDOM, {"opt": 10.3906, "dp": 10.4649, "mdc": 10.4649, "dc": 10.6092}),
        "extreme": (EXTREME, {"opt": 10.1965, "dp": 10.1965, "mdc": 10.1965, "dc": 10.5111}),
    }
    bad = []
    got = {}
    for name, (vals, targets) in want.items():
        areas = AreaList.from_values(vals)
        for algo, target in targets.items():
            if algo == "opt":
                m = build_model(UNIT, areas)
                s = solve(m)
                value = s.reported_perimeter
                if s.status != "optimal" or check_feasibility(m, s):
                    bad.append(f"{name}/opt status {s.status}")
            else:
                value = layout_metrics(run_algorithm(algo, areas, UNIT)).total_perimeter
            got[f"{name}/{algo}"] = round(value, 4)
            if abs(value - target) > 1e-3:
                bad.append(f"{name}/{algo} {value:.5f} != {target}")
    elapsed = time.monotonic() - t0
    if elapsed >= 600:
        bad.append(f"took {elapsed:.0f} s")
    check(1, not bad, f"{got} in {elapsed:.0f} s" + (f"; {bad}" if bad else ""))


# 2 -------------------------------------------------------------------------

def test_criterion_2_extreme_split():
    box = Rect(0, 0, 8, 4)
    areas = AreaList.from_values([15.0] + [1.0] * 17)
    dc_ars = [aspect_ratio(r) for r in dc_baseline(box, areas).cells.values()]
    mdc_max = layout_metrics(modified_dc(box, areas, SplitConstant(2.0))).max_ar
    ok = any(abs(a - 16) <= 1e-6 for a in dc_ars) and mdc_max < 2
    check(2, ok, f"dc max AR {max(dc_ars):.6f}, mdc max AR {mdc_max:.4f}")


# 3 -------------------------------------------------------------------------

def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(3)
    t0 = time.monotonic()
    worst = 0.0
    for n in range(2, 7):
        for _ in range(100):
            box = Rect(0, 0, float(rng.uniform(0.25, 4)), 1.0)
            a = random_areas(rng, n, total=box.area, lo=0.01)
            worst = max(worst, abs(internal(dynamic_prog(box, a)) - internal(slicing_oracle(box, a))))
    elapsed = time.monotonic() - t0
    check(3, worst <= 1e-9 and elapsed < 60, f"max |dp - oracle| = {worst:.2e} over 500 instances in {elapsed:.1f} s")


# 4 -------------------------------------------------------------------------

def test_criterion_4_dominance_chain():
    rng = np.random.default_rng(4)
    bad = []
    statuses = {}
    t0 = time.monotonic()
    for k in range(200):
        n = int(rng.integers(1, 10))
        box = Rect(0, 0, float(rng.uniform(0.5, 2)), 1.0)
        a = random_areas(rng, n, total=box.area, lo=0.02)
        m = build_model(box, a)
        s = solve(m, SolveConfig(time_limit=2.0))
        statuses[s.status] = statuses.get(s.status, 0) + 1
        dp = internal(dynamic_prog(box, a))
        dc = internal(dc_baseline(box, a))
        mdc = internal(modified_dc(box, a))
        if check_feasibility(m, s):
            bad.append(f"#{k} infeasible")
        if not (s.objective <= dp + 1e-6 and dp <= min(dc, mdc) + 1e-6):
            bad.append(f"#{k} chain {s.objective:.6f} {dp:.6f} {dc:.6f} {mdc:.6f}")
        if s.objective < lower_bound(a) - 1e-6:
            bad.append(f"#{k} below bound")
    elapsed = time.monotonic() - t0
    check(4, not bad, f"200 instances, statuses {statuses}, {elapsed:.0f} s" + (f"; {bad[:5]}" if bad else ""))


# 5 -------------------------------------------------------------------------

def _rand_rect(rng):
    return Rect(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)),
                float(rng.uniform(0.01, 1)), float(rng.uniform(0.01, 1)))


def test_criterion_5_hausdorff():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        a, b = _rand_rect(rng), _rand_rect(rng)
        worst = max(worst, abs(grid_hausdorff(a, b, 1e-3) - hausdorff_distance(a, b)))
    axioms = 0
    for _ in range(1000):
        a, b, c = _rand_rect(rng), _rand_rect(rng), _rand_rect(rng)
        ok = (hausdorff_distance(a, b) == hausdorff_distance(b, a)
              and hausdorff_distance(a, a) == 0 and hausdorff_distance(a, b) > 0
              and hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12)
        axioms += not ok
    check(5, worst <= 2e-3 and axioms == 0,
          f"max |formula - grid| = {worst:.2e} on 1000 pairs; {axioms} axiom failures on 1000 triples")


# 6 -------------------------------------------------------------------------

def _overlaps(rects: np.ndarray, tol: float) -> int:
    """Pairs with overlap area above tol, blocked to bound memory."""
    x0, y0 = rects[:, 0], rects[:, 1]
    x1, y1 = x0 + rects[:, 2], y0 + rects[:, 3]
    count = 0
    for s in range(0, len(rects), 256):
        e = min(len(rects), s + 256)
        ox = np.minimum(x1[s:e, None], x1[None, :]) - np.maximum(x0[s:e, None], x0[None, :])
        oy = np.minimum(y1[s:e, None], y1[None, :]) - np.maximum(y0[s:e, None], y0[None, :])
        ov = np.clip(ox, 0, None) * np.clip(oy, 0, None)
        idx = np.arange(s, e)
        ov[idx - s, idx] = 0
        count += int((ov > tol).sum())
    return count // 2


def test_criterion_6_spiral_invariants():
    rng = np.random.default_rng(6)
    fns = [symmetric_spiral, square_bundle_spiral, strip_bundle_spiral]
    bad = []
    largest = 0
    for k in range(500):
        n = 10_000 if k % 100 == 0 else int(round(10 ** rng.uniform(0, 4)))
        largest = max(largest, n)
        areas = random_areas(rng, n, lo=0.001)
        rho = (2.0, PHI)[k % 2]
        fn = fns[k % 3]
        state = {"seen": 0, "area": 0.0, "box": None, "worst": 0.0}

        def on_place(st):
            new = st.placed[state["seen"]:]
            state["seen"] = len(st.placed)
            for _, (x, y, w, h) in new:
                state["area"] += w * h
                b = state["box"]
                state["box"] = (x, y, x + w, y + h) if b is None else \
                    (min(b[0], x), min(b[1], y), max(b[2], x + w), max(b[3], y + h))
            ux, uy, uw, uh = st.union_box
            b = state["box"]
            dev = max(abs(uw * uh - state["area"]) / state["area"],
                      max(abs(ux - b[0]), abs(uy - b[1]), abs(ux + uw - b[2]), abs(uy + uh - b[3])) / max(uw, uh))
            state["worst"] = max(state["worst"], dev)

        lay = fn(areas, SpiralConfig(rho), on_place=on_place)
        c = lay.container
        cells = np.array([lay.cells[i].as_tuple() for i in lay.ids()])
        total = math.fsum(areas.areas)
        problems = []
        if state["worst"] > 1e-9:
            problems.append(f"union deviates {state['worst']:.1e}")
        if abs(c.area - total) > 1e-9 * total:
            problems.append("container area")
        if c.w < c.h:
            problems.append("width < height")
        if _overlaps(cells, 1e-9 * c.area):
            problems.append("overlap")
        if problems:
            bad.append(f"#{k} {fn.__name__} n={n}: {problems}")
    check(6, not bad, f"500 instances up to n={largest}, both seed ratios" + (f"; {bad[:5]}" if bad else ""))


# 7 -------------------------------------------------------------------------

SUITE_ALGOS = ("squarified", "dc", "mdc", "dp", "sspiral", "sqbundle", "stbundle")


@pytest.fixture(scope="module")
def suite_means():
    rng = np.random.default_rng(2024)
    sums = {a: np.zeros(5) for a in SUITE_ALGOS}
    for k in range(25):
        areas = random_areas(rng, int(rng.integers(4, 13)))
        for algo in SUITE_ALGOS:
            rep = stability_study(algo, areas, seed=k, container=None if algo in SPIRALS else UNIT)
            b = rep.base
            hd = np.mean([lv.avg_hd for lv in rep.levels])
            sums[algo] += [b.total_perimeter, b.max_ar, b.avg_ar, b.awar, hd]
    return {a: v / 25 for a, v in sums.items()}


def test_criterion_7_qualitative_orderings(suite_means):
    mean = suite_means
    dp_beats_dc = all(mean["dp"][i] < mean["dc"][i] for i in range(4))
    worst_avg_ar = max(SUITE_ALGOS, key=lambda a: mean[a][2])
    hd_rank = sorted(SUITE_ALGOS, key=lambda a: mean[a][4])
    ss_rank = hd_rank.index("sspiral") + 1
    ok = dp_beats_dc and worst_avg_ar == "sspiral" and ss_rank <= 2
    detail = (f"dp beats dc on perimeter/maxAR/avgAR/AWAR: {dp_beats_dc}; worst avgAR: {worst_avg_ar}; "
              f"sspiral avgHD rank {ss_rank} of {len(SUITE_ALGOS)} "
              f"(order {', '.join(f'{a}={mean[a][4]:.3f}' for a in hd_rank)})")
    check(7, ok, detail)


# 8 -------------------------------------------------------------------------

def test_criterion_8_scale():
    rng = np.random.default_rng(8)
    big = random_areas(rng, 100_000, lo=0.01)
    times = {}
    for name, fn in (("squarified", lambda: squarified(UNIT, big)), ("dc", lambda: dc_baseline(UNIT, big)),
                     ("mdc", lambda: modified_dc(UNIT, big)), ("sspiral", lambda: symmetric_spiral(big)),
                     ("sqbundle", lambda: square_bundle_spiral(big)), ("stbundle", lambda: strip_bundle_spiral(big))):
        t0 = time.monotonic()
        lay = fn()
        times[name] = time.monotonic() - t0
        assert len(lay.cells) == 100_000
    leaves = random_areas(rng, 220, lo=0.01)
    t0 = time.monotonic()
    dynamic_prog(UNIT, leaves)
    times["dp(220)"] = time.monotonic() - t0
    ok = all(t < 5 for k, t in times.items() if k != "dp(220)") and times["dp(220)"] < 600
    check(8, ok, ", ".join(f"{k} {t:.2f} s" for k, t in times.items()))


# 9 -------------------------------------------------------------------------

def test_criterion_9_beta_sensitivity():
    rng = np.random.default_rng(9)
    bad = []
    pairs = []
    for k in range(20):
        n = 3 + k % 4
        a = random_areas(rng, n, lo=0.05)
        counts = []
        for beta in (0.0, 0.1):
            m = build_model(UNIT, a, ModelParams(beta=beta))
            s = solve(m)
            if s.status != "optimal" or check_feasibility(m, s):
                bad.append(f"#{k} beta={beta} status {s.status}")
            counts.append(sum(1 for _, _, w, h in s.rects if w >= h * (1 - 1e-9)))
        pairs.append(tuple(counts))
        if counts[1] < counts[0]:
            bad.append(f"#{k} horizontal count {counts[0]} -> {counts[1]}")
    check(9, not bad, f"horizontal counts (beta 0 -> 0.1): {pairs}" + (f"; {bad}" if bad else ""))


# 10 ------------------------------------------------------------------------

def test_criterion_10_determinism(tmp_path):
    inst = str(DATA / "random.json")
    cli = [sys.executable, "-m", "treemaps.cli"]
    commands = {
        "layout.json": ["layout", inst, "--algorithm", "dp", "--container", "1", "1"],
        "layout.svg": ["layout", inst, "--algorithm", "sqbundle", "--format", "svg", "--labels"],
        "opt.json": ["layout", inst, "--algorithm", "opt", "--container", "1", "1", "--node-limit", "2000"],
        "compare.csv": ["compare", inst, str(DATA / "extreme.json"), "--algorithm", "squarified,dc,mdc,dp",
                        "--container", "1", "1"],
        "study.json": ["study", inst, "--algorithm", "stbundle", "--seed", "7", "--rounds", "5"],
        "study.csv": ["study", inst, "--algorithm", "mdc", "--container", "2", "1", "--seed", "7",
                      "--format", "csv"],
    }
    differ = []
    for round_ in range(2):
        for name, argv in commands.items():
            subprocess.run(cli + argv + ["-o", str(tmp_path / f"{round_}-{name}")], check=True,
                           capture_output=True)
        subprocess.run(cli + ["render", str(tmp_path / f"{round_}-layout.json"), "--seed", "3",
                              "-o", str(tmp_path / f"{round_}-render.svg")], check=True, capture_output=True)
    for name in list(commands) + ["render.svg"]:
        if (tmp_path / f"0-{name}").read_bytes() != (tmp_path / f"1-{name}").read_bytes():
            differ.append(name)
    check(10, not differ, f"{len(commands) + 1} artifacts compared" + (f"; differing: {differ}" if differ else ""))
