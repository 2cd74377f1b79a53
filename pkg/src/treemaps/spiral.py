"""Spiral treemaps: symmetric, square-bundled and strip-bundled, plus hierarchies.

Spirals build their own container. Areas are sorted ascending, the two
smallest form a seed block of aspect ratio ``rho_s``, and later cells or
bundles are attached on the top, right, bottom and left of the growing union
in turn, always spanning the whole side so the union stays a rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .geometry import Layout, Rect, rotate_ccw90
from .subdivision import squarify_boxes
from .treemodel import AreaList, WeightedTree

PHI = (1 + math.sqrt(5)) / 2
DIRECTIONS = ("top", "right", "bottom", "left")


@dataclass(frozen=True)
class SpiralConfig:
    rho_s: float = 2.0

    def __post_init__(self):
        if not self.rho_s >= 1:
            raise ValueError("seed aspect ratio must be at least 1")


@dataclass
class SpiralState:
    """Progress snapshot handed to ``on_place`` after every placement step."""
    placed: list  # (id, (x, y, w, h)) in placement order; shared, do not mutate
    union_box: tuple
    direction: str


class SpiralUsageError(ValueError):
    """Raised when a spiral is asked to fill a given container."""


def _sorted(areas: AreaList):
    if len(areas) == 0:
        raise ValueError("no areas to lay out")
    order = sorted(range(len(areas)), key=lambda i: (areas.areas[i], areas.ids[i]))
    return [areas.areas[i] for i in order], [areas.ids[i] for i in order]


def _square_k(vals, i: int, side: float) -> int:
    """Last index of the bundle whose block is closest to a square."""
    n = len(vals)
    S = vals[i]
    best = abs(side - S / side)
    k = i
    while k + 1 < n:
        nxt = abs(side - (S + vals[k + 1]) / side)
        if not nxt < best:
            break
        S += vals[k + 1]
        best = nxt
        k += 1
    return k


def _strip_k(vals, i: int, side: float) -> int:
    """Last index of the strip with the smallest worst cell aspect ratio."""
    n = len(vals)
    # ascending order: the thinnest cell is vals[i], the fattest vals[k]
    def worst(S, k):
        t2 = (S / side) ** 2
        return max(t2 / vals[i], vals[k] / t2)
    S = vals[i]
    best = worst(S, i)
    k = i
    while k + 1 < n:
        nxt = worst(S + vals[k + 1], k + 1)
        if not nxt < best:
            break
        S += vals[k + 1]
        best = nxt
        k += 1
    return k


def _slice_strip(vals, block, direction: str):
    """Cut a strip into cells along its length in the spiral's travel order."""
    x, y, w, h = block
    out = []
    if direction in ("top", "bottom"):
        pos = x if direction == "top" else x + w
        for m, a in enumerate(vals):
            cw = a / h
            if direction == "top":
                cw = cw if m < len(vals) - 1 else x + w - pos
                out.append((pos, y, cw, h))
                pos += cw
            else:
                cw = cw if m < len(vals) - 1 else pos - x
                pos -= cw
                out.append((pos, y, cw, h))
    else:
        pos = y + h if direction == "right" else y
        for m, a in enumerate(vals):
            ch = a / w
            if direction == "right":
                ch = ch if m < len(vals) - 1 else pos - y
                pos -= ch
                out.append((x, pos, w, ch))
            else:
                ch = ch if m < len(vals) - 1 else y + h - pos
                out.append((x, pos, w, ch))
                pos += ch
    return out


def _spiral(vals, ids, mode: str, rho: float, seed_height: float | None = None,
            on_place: Callable[[SpiralState], None] | None = None):
    """Core accretion loop. Returns (cells by id, bundles, blocks, union box)."""
    n = len(vals)
    cells: dict = {}
    placed: list = []
    bundles: list = []
    blocks: list = []
    if n == 1:
        h = seed_height or math.sqrt(vals[0] / rho)
        q = (0.0, 0.0, vals[0] / h, h)
        cells[ids[0]] = q
        placed.append((ids[0], q))
        if on_place:
            on_place(SpiralState(placed, q, "top"))
        return cells, bundles, blocks, q
    h = seed_height or math.sqrt((vals[0] + vals[1]) / rho)
    w1, w2 = vals[0] / h, vals[1] / h
    r2 = (0.0, 0.0, w2, h)
    r1 = (w2, 0.0, w1, h)
    cells[ids[0]], cells[ids[1]] = r1, r2
    Q = (0.0, 0.0, w1 + w2, h)
    placed += [(ids[0], r1), (ids[1], r2)]
    if on_place:
        on_place(SpiralState(placed, Q, "top"))
    i, d = 2, 0
    while i < n:
        direction = DIRECTIONS[d]
        qx, qy, qw, qh = Q
        side = qw if direction in ("top", "bottom") else qh
        if mode == "symmetric":
            k = i
        elif mode == "square":
            k = _square_k(vals, i, side)
        else:
            k = _strip_k(vals, i, side)
        S = math.fsum(vals[i:k + 1])
        t = S / side
        if direction == "top":
            block, Q = (qx, qy + qh, qw, t), (qx, qy, qw, qh + t)
        elif direction == "right":
            block, Q = (qx + qw, qy, t, qh), (qx, qy, qw + t, qh)
        elif direction == "bottom":
            block, Q = (qx, qy - t, qw, t), (qx, qy - t, qw, qh + t)
        else:
            block, Q = (qx - t, qy, t, qh), (qx - t, qy, qw + t, qh)
        members = ids[i:k + 1]
        if mode == "symmetric":
            boxes = [block]
        elif mode == "square":
            inner = sorted(range(i, k + 1), key=lambda m: (-vals[m], ids[m]))
            members = [ids[m] for m in inner]
            boxes = squarify_boxes([vals[m] for m in inner], block)
        else:
            boxes = _slice_strip(vals[i:k + 1], block, direction)
        for cid, b in zip(members, boxes):
            cells[cid] = b
            placed.append((cid, b))
        if mode != "symmetric":
            bundles.append(tuple(ids[i:k + 1]))
            blocks.append(block)
        if on_place:
            on_place(SpiralState(placed, Q, direction))
        i = k + 1
        d = (d + 1) % 4
    return cells, bundles, blocks, Q


def _to_layout(areas: AreaList, cells, bundles, blocks, Q) -> Layout:
    ox, oy = Q[0], Q[1]
    def mk(b):
        return Rect(b[0] - ox, b[1] - oy, b[2], b[3])
    layout = Layout(Rect(0.0, 0.0, Q[2], Q[3]),
                    {i: mk(cells[i]) for i in sorted(cells)},
                    areas.name_map(), tuple(bundles), tuple(mk(b) for b in blocks))
    if layout.container.w < layout.container.h:
        layout = rotate_ccw90(layout)
    return layout


def _run(mode: str, areas: AreaList, cfg: SpiralConfig | None, container, on_place,
         seed_height: float | None = None) -> Layout:
    if container is not None:
        raise SpiralUsageError("spiral layouts construct their own container")
    cfg = cfg or SpiralConfig()
    vals, ids = _sorted(areas)
    return _to_layout(areas, *_spiral(vals, ids, mode, cfg.rho_s, seed_height, on_place))


def symmetric_spiral(areas: AreaList, cfg: SpiralConfig | None = None, container: Rect | None = None,
                     on_place: Optional[Callable[[SpiralState], None]] = None) -> Layout:
    """One cell per turn of the spiral."""
    return _run("symmetric", areas, cfg, container, on_place)


def square_bundle_spiral(areas: AreaList, cfg: SpiralConfig | None = None, container: Rect | None = None,
                         on_place: Optional[Callable[[SpiralState], None]] = None) -> Layout:
    """One near-square bundle per turn, laid out inside by squarified."""
    return _run("square", areas, cfg, container, on_place)


def strip_bundle_spiral(areas: AreaList, cfg: SpiralConfig | None = None, container: Rect | None = None,
                        on_place: Optional[Callable[[SpiralState], None]] = None) -> Layout:
    """One strip per turn, grown while the worst cell aspect ratio improves."""
    return _run("strip", areas, cfg, container, on_place)


SPIRAL_MODES = {"sspiral": "symmetric", "sqbundle": "square", "stbundle": "strip"}


# ---------------------------------------------------------------- hierarchies

@dataclass(frozen=True)
class NestedLayout:
    """Rectangle of one tree node and the layouts of its children."""
    name: str
    rect: Rect
    children: tuple["NestedLayout", ...] = ()
    id: int | None = None
    bundles: tuple[tuple[int, ...], ...] = ()
    blocks: tuple[Rect, ...] = ()

    def leaves(self) -> list["NestedLayout"]:
        if not self.children:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def flatten(self) -> Layout:
        """Leaf-level Layout keyed by leaf id."""
        leaves = self.leaves()
        return Layout(self.rect, {l.id: l.rect for l in leaves}, {l.id: l.name for l in leaves})

    def internal_rects(self) -> list[tuple[str, Rect, int]]:
        """(name, rect, depth) of every internal node, parents first."""
        out = []
        def walk(node, depth):
            if node.children:
                out.append((node.name, node.rect, depth))
                for c in node.children:
                    walk(c, depth + 1)
        walk(self, 0)
        return out


def _map_into(node: NestedLayout, target: Rect) -> NestedLayout:
    """Move a built subtree into ``target`` by an axis-aligned affine map.

    The subtree is first turned by 90 degrees when its orientation disagrees
    with the target's. Areas scale by target.area / rect.area.
    """
    if (node.rect.w >= node.rect.h) != (target.w >= target.h):
        node = _rotate_nested(node, node.rect)
    src = node.rect
    sx, sy = target.w / src.w, target.h / src.h

    def m(r: Rect) -> Rect:
        return Rect(target.x + (r.x - src.x) * sx, target.y + (r.y - src.y) * sy, r.w * sx, r.h * sy)

    def walk(n: NestedLayout) -> NestedLayout:
        return NestedLayout(n.name, m(n.rect), tuple(walk(c) for c in n.children), n.id,
                            n.bundles, tuple(m(b) for b in n.blocks))
    return walk(node)


def _rotate_nested(node: NestedLayout, frame: Rect) -> NestedLayout:
    def rot(r: Rect) -> Rect:
        return Rect(frame.x + (frame.y1 - r.y1), frame.y + (r.x - frame.x), r.h, r.w)

    def walk(n: NestedLayout) -> NestedLayout:
        return NestedLayout(n.name, rot(n.rect), tuple(walk(c) for c in n.children), n.id,
                            n.bundles, tuple(rot(b) for b in n.blocks))
    return walk(node)


def _spiral_tree(node: WeightedTree, mode: str, rho: float) -> NestedLayout:
    """Bottom-up: build children first, then spiral their boxes together."""
    if node.is_leaf:
        side = math.sqrt(node.weight)
        return NestedLayout(node.name, Rect(0.0, 0.0, side, side), (), node.id)
    built = [_spiral_tree(c, mode, rho) for c in node.children]
    bottom = all(c.is_leaf for c in node.children)
    keys = list(range(len(built)))
    areas = AreaList(tuple(c.weight for c in node.children), tuple(keys),
                     tuple(c.name for c in node.children))
    vals, order = _sorted(areas)
    seed_height = None
    if not bottom and not node.children[order[0]].is_leaf:
        # keep the smallest child's own shape instead of forcing rho_s
        r = built[order[0]].rect
        seed_height = r.h * math.sqrt(vals[0] / r.area)
    layout = _to_layout(areas, *_spiral(vals, order, mode, rho, seed_height))
    kids = []
    for k in keys:
        slot = layout.cells[k]
        child = built[k]
        if node.children[k].is_leaf:
            kids.append(NestedLayout(child.name, slot, (), child.id))
        else:
            kids.append(_map_into(child, slot))
    return NestedLayout(node.name, layout.container, tuple(kids), None,
                        layout.bundles, layout.blocks)


def _subdivide_tree(node: WeightedTree, rect: Rect, algorithm: str, options: dict) -> NestedLayout:
    from .algorithms import run_algorithm
    if node.is_leaf:
        return NestedLayout(node.name, rect, (), node.id)
    kids = node.children
    scale = rect.area / math.fsum(c.weight for c in kids)
    areas = AreaList(tuple(c.weight * scale for c in kids), tuple(range(len(kids))),
                     tuple(c.name for c in kids))
    layout = run_algorithm(algorithm, areas, container=rect, **options)
    return NestedLayout(node.name, rect,
                        tuple(_subdivide_tree(c, layout.cells[k], algorithm, options)
                              for k, c in enumerate(kids)),
                        None, layout.bundles, layout.blocks)


def layout_hierarchy(tree: WeightedTree, algorithm: str, container: Rect | None = None,
                     **options) -> NestedLayout:
    """Lay out every level of a tree.

    Subdivision algorithms work top-down inside ``container``. Spirals work
    bottom-up without one: the seed aspect ratio is enforced only for nodes
    whose children are all leaves, and built subtrees are mapped into the
    slots the parent's spiral assigns them.
    """
    if algorithm in SPIRAL_MODES:
        if container is not None:
            raise SpiralUsageError("spiral layouts construct their own container")
        rho = options.get("rho_s", options.get("rho", 2.0))
        SpiralConfig(rho)
        if tree.is_leaf:
            vals = AreaList((tree.weight,), (tree.id or 0,), (tree.name,))
            flat = _run(SPIRAL_MODES[algorithm], vals, SpiralConfig(rho), None, None)
            return NestedLayout(tree.name, flat.container, (), tree.id)
        return _spiral_tree(tree, SPIRAL_MODES[algorithm], rho)
    if container is None:
        raise ValueError(f"algorithm {algorithm!r} needs a container")
    return _subdivide_tree(tree, container, algorithm, options)
