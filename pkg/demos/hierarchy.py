"""Two-level tree laid out by a subdivision algorithm and by a spiral.

Run: python3 demos/hierarchy.py  (writes demos/out/hierarchy-*.svg)
"""

from pathlib import Path

from treemaps.geometry import Rect
from treemaps.metrics import layout_metrics
from treemaps.render import render_svg
from treemaps.spiral import layout_hierarchy
from treemaps.treemodel import parse_tree

TREE = """{"name": "root", "children": [
  {"name": "fruit", "children": [{"name": "apple", "weight": 5}, {"name": "pear", "weight": 3},
                                 {"name": "plum", "weight": 1}]},
  {"name": "veg", "children": [{"name": "leek", "weight": 4}, {"name": "kale", "weight": 2}]},
  {"name": "nuts", "children": [{"name": "pecan", "weight": 2}, {"name": "hazel", "weight": 1},
                                {"name": "cashew", "weight": 1}, {"name": "almond", "weight": 1}]}]}"""


def main():
    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)
    tree = parse_tree(TREE)
    for algo, box in (("dp", Rect(0, 0, 20, 10)), ("sqbundle", None)):
        nested = layout_hierarchy(tree, algo, box)
        flat = nested.flatten()
        m = layout_metrics(flat)
        print(f"{algo:9s} container {flat.container.w:.2f} x {flat.container.h:.2f}, "
              f"perimeter {m.total_perimeter:.3f}, maxAR {m.max_ar:.3f}")
        for name, rect, depth in nested.internal_rects():
            print(f"  {'  ' * depth}{name}: {rect.w:.2f} x {rect.h:.2f} at ({rect.x:.2f}, {rect.y:.2f})")
        (out / f"hierarchy-{algo}.svg").write_text(render_svg(flat, show_labels=True))


if __name__ == "__main__":
    main()
