"""How the horizontality weight changes the optimal layout.

Run: python3 demos/beta_sweep.py [n]

Solves one seeded instance (default five cells) for a few beta values and
prints the perimeter and how many cells end up at least as wide as tall.
Larger beta trades perimeter for wide cells.
"""

import sys
import time

import numpy as np

from treemaps.geometry import Rect
from treemaps.optimizer import ModelParams, build_model, solve
from treemaps.treemodel import AreaList


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    rng = np.random.default_rng(0)
    v = rng.uniform(0.05, 1, n)
    areas = AreaList.from_values(list(v / v.sum()))
    print("areas", ", ".join(f"{a:.4f}" for a in areas.areas))
    for beta in (0.0, 0.05, 0.1, 0.2):
        t0 = time.monotonic()
        m = build_model(Rect(0, 0, 1, 1), areas, ModelParams(beta=beta))
        s = solve(m)
        wide = sum(1 for _, _, w, h in s.rects if w >= h)
        print(f"beta {beta:4.2f}: perimeter {s.reported_perimeter:.4f}, objective {s.objective:.4f}, "
              f"wide cells {wide}/{n}, {s.status}, {time.monotonic() - t0:.1f} s")


if __name__ == "__main__":
    main()
