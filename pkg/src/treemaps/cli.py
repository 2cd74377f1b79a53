"""Command line: layout, compare, study, render.

Exit codes: 0 success, 1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .algorithms import ALGORITHMS, SPIRALS, needs_container, run_algorithm
from .geometry import Layout, Rect
from .metrics import DEFAULT_LEVELS, DEFAULT_ROUNDS, layout_metrics, stability_study
from .render import render_svg
from .spiral import layout_hierarchy
from .treemodel import AreaList, TreeParseError, TreeValidationError, leaf_areas, load_tree

METRIC_COLUMNS = ("instance", "algorithm", "n", "perimeter", "maxAR", "avgAR", "AWAR")


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    algorithm: str
    instance: str
    container: Rect | None = None  # None means "auto" (spirals)
    options: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm in SPIRALS and self.container is not None:
            raise UsageError(f"{self.algorithm} builds its own container; drop --container")
        if needs_container(self.algorithm) and self.container is None:
            raise UsageError(f"{self.algorithm} needs --container W H")


# serialization

def layout_to_json(layout: Layout) -> str:
    c = layout.container
    doc = {
        "container": {"x": c.x, "y": c.y, "w": c.w, "h": c.h},
        "cells": [{"id": i, "name": layout.names.get(i, str(i)), "x": r.x, "y": r.y, "w": r.w, "h": r.h}
                  for i, r in ((i, layout.cells[i]) for i in layout.ids())],
        "bundles": [list(b) for b in layout.bundles],
    }
    return json.dumps(doc, indent=2) + "\n"


def layout_from_json(text: str) -> Layout:
    doc = json.loads(text)
    c = doc["container"]
    cells, names = {}, {}
    for cell in doc["cells"]:
        cells[int(cell["id"])] = Rect(cell["x"], cell["y"], cell["w"], cell["h"])
        names[int(cell["id"])] = str(cell.get("name", cell["id"]))
    bundles = tuple(tuple(int(i) for i in b) for b in doc.get("bundles", []))
    return Layout(Rect(c["x"], c["y"], c["w"], c["h"]), cells, names, bundles)


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def format_rows(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "md":
        lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
        lines += ["| " + " | ".join(_fmt(r[c]) for c in columns) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


# running

def _options(args) -> dict:
    opts = {"c": args.c, "rho": args.rho, "alpha": args.alpha, "beta": args.beta, "strict": args.strict}
    if getattr(args, "time_limit", None) is not None:
        opts["time_limit"] = args.time_limit
    if getattr(args, "node_limit", None) is not None:
        opts["node_limit"] = args.node_limit
    return opts


def _container(values) -> Rect | None:
    if values is None or values == ["auto"]:
        return None
    if len(values) != 2:
        raise UsageError("--container takes W H or 'auto'")
    try:
        w, h = float(values[0]), float(values[1])
    except ValueError:
        raise UsageError("--container takes two numbers") from None
    if not (w > 0 and h > 0):
        raise UsageError("container sides must be positive")
    return Rect(0.0, 0.0, w, h)


def _areas(path: str, container: Rect | None, strict: bool) -> AreaList:
    areas = leaf_areas(load_tree(path))
    if container is not None and not strict:
        areas = areas.scaled_to(container.area)
    return areas


def run_spec(spec: RunSpec) -> Layout:
    """Lay out one instance; hierarchical trees are laid out level by level."""
    tree = load_tree(spec.instance)
    opts = dict(spec.options)
    if tree.height() > 1:
        if spec.container is not None and not opts.get("strict"):
            from .treemodel import normalize_weights
            tree = normalize_weights(tree, spec.container.area)
        opts.pop("strict", None)
        if spec.algorithm in SPIRALS:
            opts = {"rho": opts["rho"]}
        return layout_hierarchy(tree, spec.algorithm, spec.container, **opts).flatten()
    areas = _areas(spec.instance, spec.container, bool(opts.get("strict")))
    return run_algorithm(spec.algorithm, areas, spec.container, **opts)


def _metrics_row(instance: str, algorithm: str, layout: Layout) -> dict:
    m = layout_metrics(layout)
    return {"instance": instance, "algorithm": algorithm, "n": len(layout), "perimeter": m.total_perimeter,
            "maxAR": m.max_ar, "avgAR": m.avg_ar, "AWAR": m.awar}


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_layout(args) -> int:
    spec = RunSpec(args.algorithm, args.instance, _container(args.container), _options(args), args.output,
                   args.format or "json")
    spec.validate()
    if spec.format not in ("json", "svg"):
        raise UsageError("layout writes json or svg")
    layout = run_spec(spec)
    text = layout_to_json(layout) if spec.format == "json" else render_svg(layout, show_labels=args.labels)
    row = format_rows([_metrics_row(Path(args.instance).stem, args.algorithm, layout)], METRIC_COLUMNS, "csv")
    _write(spec.output, text)
    (sys.stdout if spec.output else sys.stderr).write(row)
    return 0


def _compare_one(job):
    instance, algorithm, container, opts = job
    layout = run_spec(RunSpec(algorithm, instance, container if algorithm not in SPIRALS else None, opts))
    return _metrics_row(Path(instance).stem, algorithm, layout)


def workers() -> int:
    try:
        return max(1, int(os.environ.get("TREEMAP_THREADS", "1")))
    except ValueError:
        raise UsageError("TREEMAP_THREADS must be an integer") from None


def cmd_compare(args) -> int:
    algos = [a for a in (args.algorithm or "").split(",") if a]
    if not algos:
        raise UsageError("compare needs --algorithm with at least one id")
    if not args.instances:
        raise UsageError("compare needs at least one instance")
    container = _container(args.container)
    for a in algos:
        RunSpec(a, "", container if a not in SPIRALS else None).validate()
    fmt = args.format or "csv"
    if fmt not in ("csv", "md", "json"):
        raise UsageError("compare writes csv, md or json")
    opts = _options(args)
    jobs = [(inst, a, container, opts) for inst in args.instances for a in algos]
    n = min(workers(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(n) as ex:
            rows = list(ex.map(_compare_one, jobs))
    else:
        rows = [_compare_one(j) for j in jobs]
    rows.sort(key=lambda r: (r["instance"], algos.index(r["algorithm"])))
    for a in algos:
        mine = [r for r in rows if r["algorithm"] == a]
        mean = {"instance": "mean", "algorithm": a, "n": sum(r["n"] for r in mine) / len(mine)}
        for col in METRIC_COLUMNS[3:]:
            mean[col] = sum(r[col] for r in mine) / len(mine)
        rows.append(mean)
    _write(args.output, format_rows(rows, METRIC_COLUMNS, fmt))
    return 0


def cmd_study(args) -> int:
    spec = RunSpec(args.algorithm, args.instance, _container(args.container), _options(args), args.output,
                   args.format or "json")
    spec.validate()
    if spec.format not in ("json", "csv"):
        raise UsageError("study writes json or csv")
    try:
        levels = [float(v) for v in args.levels.split(",")] if args.levels else list(DEFAULT_LEVELS)
    except ValueError:
        raise UsageError("--levels takes comma-separated numbers") from None
    if args.rounds < 1:
        raise UsageError("--rounds must be at least 1")
    areas = _areas(spec.instance, spec.container, bool(spec.options.get("strict")))
    opts = dict(spec.options)
    report = stability_study(spec.algorithm, areas, levels, args.rounds, args.seed, container=spec.container,
                             **opts)
    _write(spec.output, report.to_json() + "\n" if spec.format == "json" else report.to_csv())
    return 0


def cmd_render(args) -> int:
    try:
        layout = layout_from_json(Path(args.layout).read_text(encoding="utf-8"))
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise UsageError(f"{args.layout}: not a layout file ({e})") from None
    _write(args.output, render_svg(layout, show_labels=args.labels, show_bundles=not args.no_bundles,
                                   palette_seed=args.seed))
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", required=True, help="one of " + ", ".join(ALGORITHMS))
    p.add_argument("--container", nargs="+", metavar="W H", help="container sides, or 'auto' for spirals")
    p.add_argument("--c", type=float, default=2.0, help="split constant for mdc (default 2)")
    p.add_argument("--rho", type=float, default=2.0, help="spiral seed aspect ratio (default 2)")
    p.add_argument("--alpha", type=int, choices=(0, 1), default=0, help="area-weighted objective for opt")
    p.add_argument("--beta", type=float, default=0.0, help="horizontality weight for opt")
    p.add_argument("--time-limit", type=float, help="opt: seconds before returning the best layout so far")
    p.add_argument("--node-limit", type=int, help="opt: node budget")
    p.add_argument("--strict", action="store_true", help="reject area sums that do not match the container")
    p.add_argument("--format", choices=("json", "csv", "md", "svg"))
    p.add_argument("-o", "--output", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treemaps", description="Rectangular treemap layouts and metrics.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("layout", help="lay out one instance; prints its metrics row")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--labels", action="store_true", help="svg: draw cell names")
    p.set_defaults(func=cmd_layout)
    p = sub.add_parser("compare", help="metrics table over instances and algorithms")
    p.add_argument("instances", nargs="*")
    _common(p)
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("study", help="stability under perturbed areas")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", help=f"comma-separated levels (default {','.join(map(str, DEFAULT_LEVELS))})")
    p.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p.set_defaults(func=cmd_study)
    p = sub.add_parser("render", help="SVG from a layout JSON file")
    p.add_argument("layout")
    p.add_argument("--labels", action="store_true")
    p.add_argument("--no-bundles", action="store_true", help="omit bundle outlines")
    p.add_argument("--seed", type=int, default=0, help="palette seed")
    p.add_argument("--format", choices=("svg",), default="svg")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"treemaps: error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, TreeParseError, TreeValidationError) as e:
        print(f"treemaps: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # computation failure
        print(f"treemaps: {args.command} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
