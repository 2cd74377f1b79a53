"""Layout quality metrics, Hausdorff stability, and the perturbation study."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import Layout, Vec2, aspect_ratio, hausdorff_distance, translate_layout
from .treemodel import AreaList

DEFAULT_LEVELS = (0.01, 0.05, 0.1)
DEFAULT_ROUNDS = 10
REPORT_COLUMNS = ("algorithm", "n", "level", "rounds", "seed", "perimeter",
                  "maxAR", "avgAR", "AWAR", "maxHD", "avgHD")


@dataclass(frozen=True)
class MetricsReport:
    total_perimeter: float
    max_ar: float
    avg_ar: float
    awar: float


@dataclass(frozen=True)
class LevelStability:
    level: float
    max_hd: float
    avg_hd: float
    rounds: int
    seed: int


@dataclass(frozen=True)
class StabilityReport:
    algorithm: str
    n: int
    base: MetricsReport
    levels: tuple[LevelStability, ...] = field(default_factory=tuple)

    def rows(self) -> list[dict]:
        out = []
        for lv in self.levels:
            out.append({
                "algorithm": self.algorithm, "n": self.n, "level": lv.level,
                "rounds": lv.rounds, "seed": lv.seed,
                "perimeter": self.base.total_perimeter, "maxAR": self.base.max_ar,
                "avgAR": self.base.avg_ar, "AWAR": self.base.awar,
                "maxHD": lv.max_hd, "avgHD": lv.avg_hd,
            })
        return out

    def to_json(self) -> str:
        return json.dumps({"algorithm": self.algorithm, "n": self.n, "base": asdict(self.base),
                           "rows": self.rows()}, indent=2)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] = REPORT_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def layout_metrics(l: Layout) -> MetricsReport:
    if len(l.cells) == 0:
        raise ValueError("empty layout")
    rects = [l.cells[i] for i in l.ids()]
    ars = [aspect_ratio(r) for r in rects]
    areas = [r.area for r in rects]
    return MetricsReport(
        total_perimeter=2.0 * math.fsum(r.w + r.h for r in rects),
        max_ar=max(ars),
        avg_ar=math.fsum(ars) / len(ars),
        awar=math.fsum(a * r for a, r in zip(areas, ars)) / math.fsum(areas),
    )


def perturb_areas(areas: AreaList, level: float, rng: np.random.Generator) -> AreaList:
    """Add Uniform(0,1)*level to every area, then rescale to the old total."""
    if level < 0:
        raise ValueError("perturbation level must be non-negative")
    if level == 0:
        return areas
    base = np.asarray(areas.areas, dtype=float)
    noisy = base + rng.random(len(base)) * level
    noisy *= math.fsum(areas.areas) / math.fsum(noisy)
    return AreaList(tuple(float(v) for v in noisy), areas.ids, areas.names)


def stability_between(a: Layout, b: Layout, align: bool = True) -> tuple[float, float]:
    """Max and mean per-id Hausdorff distance between two layouts.

    With ``align`` both containers are first moved to the origin.
    """
    if set(a.cells) != set(b.cells):
        raise ValueError("layouts cover different id sets")
    if align:
        a = translate_layout(a, Vec2(-a.container.x, -a.container.y))
        b = translate_layout(b, Vec2(-b.container.x, -b.container.y))
    hds = [hausdorff_distance(a.cells[i], b.cells[i]) for i in a.ids()]
    return max(hds), math.fsum(hds) / len(hds)


def round_rng(seed: int, level_index: int, round_index: int) -> np.random.Generator:
    """Independent generator for one (seed, level, round) cell of a study."""
    return np.random.default_rng(np.random.SeedSequence([seed, level_index, round_index]))


def stability_study(algorithm: str | Callable[[AreaList], Layout], areas: AreaList,
                    levels: Sequence[float] = DEFAULT_LEVELS, rounds: int = DEFAULT_ROUNDS,
                    seed: int = 0, cumulative: bool = False, align: bool = True,
                    **options) -> StabilityReport:
    """Perturb the areas ``rounds`` times per level and compare with the base layout.

    ``algorithm`` is a registry id (options are passed through) or a callable
    mapping an AreaList to a Layout. Per level the report keeps the max of the
    per-round maxima and the mean of the per-round means.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if callable(algorithm):
        run, name = algorithm, getattr(algorithm, "__name__", "custom")
    else:
        from .algorithms import run_algorithm
        name = algorithm
        def run(al):
            return run_algorithm(algorithm, al, **options)
    base_layout = run(areas)
    out = []
    for li, level in enumerate(levels):
        mx, means = 0.0, []
        current = areas
        for r in range(rounds):
            src = current if cumulative else areas
            current = perturb_areas(src, level, round_rng(seed, li, r))
            m, avg = stability_between(base_layout, run(current), align=align)
            mx = max(mx, m)
            means.append(avg)
        out.append(LevelStability(float(level), mx, math.fsum(means) / len(means), rounds, seed))
    return StabilityReport(name, len(areas), layout_metrics(base_layout), tuple(out))
