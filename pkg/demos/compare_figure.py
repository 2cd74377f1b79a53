"""Lay out the two seven-cell instances with every algorithm and print a table.

Run: python3 demos/compare_figure.py [--with-opt]

The optimizer takes about a minute per instance on one core, so it is
skipped unless asked for. SVGs for each layout go to demos/out/.
"""

import sys
from pathlib import Path

import treemaps
from treemaps.algorithms import ALGORITHMS, SPIRALS, run_algorithm
from treemaps.geometry import Rect
from treemaps.metrics import layout_metrics
from treemaps.render import render_svg
from treemaps.treemodel import leaf_areas, load_tree

DATA = Path(treemaps.__file__).parent / "data"
OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    algos = [a for a in ALGORITHMS if a != "opt" or "--with-opt" in sys.argv]
    print(f"{'instance':10s} {'algorithm':11s} {'perimeter':>10s} {'maxAR':>7s} {'avgAR':>7s} {'AWAR':>7s}")
    for name in ("random", "extreme"):
        areas = leaf_areas(load_tree(DATA / f"{name}.json"))
        for algo in algos:
            box = None if algo in SPIRALS else Rect(0, 0, 1, 1)
            lay = run_algorithm(algo, areas, box)
            m = layout_metrics(lay)
            print(f"{name:10s} {algo:11s} {m.total_perimeter:10.4f} {m.max_ar:7.3f} {m.avg_ar:7.3f} {m.awar:7.3f}")
            (OUT / f"{name}-{algo}.svg").write_text(render_svg(lay, show_labels=True))


if __name__ == "__main__":
    main()
