"""Weighted trees, their JSON/CSV ingestion, and weight normalization."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence


class TreeParseError(ValueError):
    """Malformed tree document."""


class TreeValidationError(ValueError):
    """Well-formed document with invalid content (e.g. non-positive weight)."""


@dataclass
class WeightedTree:
    name: str
    weight: float = 0.0
    children: list["WeightedTree"] = field(default_factory=list)
    id: int | None = None  # dense leaf id in document order; None on internal nodes

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["WeightedTree"]:
        if self.is_leaf:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def height(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.height() for c in self.children)


@dataclass(frozen=True)
class AreaList:
    areas: tuple[float, ...]
    ids: tuple[int, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.areas) != len(self.ids):
            raise ValueError("areas and ids differ in length")
        if self.names and len(self.names) != len(self.ids):
            raise ValueError("names and ids differ in length")
        for a in self.areas:
            if not (a > 0 and math.isfinite(a)):
                raise TreeValidationError(f"areas must be positive and finite, got {a}")

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def total(self) -> float:
        return math.fsum(self.areas)

    def name_map(self) -> dict[int, str]:
        if not self.names:
            return {i: str(i) for i in self.ids}
        return dict(zip(self.ids, self.names))

    @classmethod
    def from_values(cls, values: Sequence[float], names: Sequence[str] | None = None) -> "AreaList":
        vals = tuple(float(v) for v in values)
        return cls(vals, tuple(range(len(vals))), tuple(names) if names else ())

    def scaled_to(self, target: float) -> "AreaList":
        total = self.total
        if not total > 0:
            raise ValueError("zero total weight")
        f = target / total
        return AreaList(tuple(a * f for a in self.areas), self.ids, self.names)


def _assign_ids(tree: WeightedTree) -> WeightedTree:
    for i, leaf in enumerate(tree.leaves()):
        leaf.id = i
    _recompute(tree)
    return tree


def _recompute(node: WeightedTree) -> float:
    if node.is_leaf:
        return node.weight
    node.weight = math.fsum(_recompute(c) for c in node.children)
    return node.weight


def _from_obj(obj, path: str) -> WeightedTree:
    if not isinstance(obj, dict):
        raise TreeParseError(f"{path}: expected an object")
    if "name" not in obj or not isinstance(obj["name"], str):
        raise TreeParseError(f"{path}: missing string 'name'")
    children = obj.get("children")
    if children is not None:
        if not isinstance(children, list) or not children:
            raise TreeParseError(f"{path}: 'children' must be a non-empty list")
        kids = [_from_obj(c, f"{path}.children[{i}]") for i, c in enumerate(children)]
        return WeightedTree(obj["name"], 0.0, kids)
    if "weight" not in obj:
        raise TreeParseError(f"{path}: leaf '{obj['name']}' needs a weight")
    w = obj["weight"]
    if isinstance(w, bool) or not isinstance(w, (int, float)):
        raise TreeParseError(f"{path}: weight must be a number")
    if not (w > 0 and math.isfinite(w)):
        raise TreeValidationError(f"{path}: leaf '{obj['name']}' has non-positive weight {w}")
    return WeightedTree(obj["name"], float(w), [])


def parse_tree(document: bytes | str, format: str = "json") -> WeightedTree:
    """Parse a JSON tree or a flat ``label,weight`` CSV."""
    text = document.decode("utf-8") if isinstance(document, bytes) else document
    if format == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise TreeParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
        return _assign_ids(_from_obj(obj, "$"))
    if format == "csv":
        leaves = []
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise TreeParseError(f"line {lineno}: expected 'label,weight'")
            label, raw = row[0].strip(), row[1].strip()
            try:
                w = float(raw)
            except ValueError:
                raise TreeParseError(f"line {lineno}: weight {raw!r} is not a number") from None
            if not (w > 0 and math.isfinite(w)):
                raise TreeValidationError(f"line {lineno}: leaf '{label}' has non-positive weight {w}")
            leaves.append(WeightedTree(label, w, []))
        if not leaves:
            raise TreeParseError("no rows")
        return _assign_ids(WeightedTree("root", 0.0, leaves))
    raise ValueError(f"unknown tree format {format!r}")


def load_tree(path: str | Path) -> WeightedTree:
    path = Path(path)
    fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    return parse_tree(path.read_bytes(), fmt)


def _to_obj(node: WeightedTree) -> dict:
    if node.is_leaf:
        return {"name": node.name, "weight": node.weight}
    return {"name": node.name, "children": [_to_obj(c) for c in node.children]}


def serialize_tree(tree: WeightedTree, format: str = "json") -> str:
    if format == "json":
        return json.dumps(_to_obj(tree), indent=2)
    if format == "csv":
        if tree.height() > 1:
            raise ValueError("CSV holds flat trees only")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for leaf in tree.leaves():
            writer.writerow([leaf.name, repr(leaf.weight)])
        return buf.getvalue()
    raise ValueError(f"unknown tree format {format!r}")


def _copy(node: WeightedTree) -> WeightedTree:
    return WeightedTree(node.name, node.weight, [_copy(c) for c in node.children], node.id)


def normalize_weights(tree: WeightedTree, target_area: float) -> WeightedTree:
    """Return a copy whose leaf weights sum to ``target_area``."""
    if not target_area > 0:
        raise ValueError("target area must be positive")
    out = _copy(tree)
    leaves = out.leaves()
    total = math.fsum(leaf.weight for leaf in leaves)
    if not total > 0:
        raise ValueError("zero total weight")
    if abs(total - target_area) > 1e-12 * target_area:
        f = target_area / total
        for leaf in leaves:
            leaf.weight *= f
    _recompute(out)
    return out


def leaf_areas(tree: WeightedTree) -> AreaList:
    leaves = tree.leaves()
    return AreaList(tuple(l.weight for l in leaves), tuple(l.id for l in leaves), tuple(l.name for l in leaves))


def fit_areas(areas: AreaList, target_area: float, strict: bool = False, rel_tol: float = 1e-9) -> AreaList:
    """Scale areas to fill ``target_area``; warn (or raise when strict) on mismatch."""
    total = areas.total
    if abs(total - target_area) <= rel_tol * target_area:
        return areas
    if strict:
        raise ValueError(f"areas sum to {total!r}, container area is {target_area!r}")
    warnings.warn(f"areas sum to {total:.6g}; rescaling to container area {target_area:.6g}", stacklevel=2)
    return areas.scaled_to(target_area)
