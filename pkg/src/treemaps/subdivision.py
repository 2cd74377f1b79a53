"""Guillotine-cut layouts: Squarified, DC, modified DC, dynamic programming.

Every function sorts areas descending (ties by id), fills the container
exactly and returns a Layout keyed by the input ids.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterator

import numpy as np

from .geometry import Layout, Rect
from .treemodel import AreaList, fit_areas


@dataclass(frozen=True)
class SplitConstant:
    c: float = 2.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("split constant must be positive")


# (x, y, w, h) as plain tuples inside the algorithms; Rects only at the end
Box = tuple


def _prepare(container: Rect, areas: AreaList, strict: bool):
    if len(areas) == 0:
        raise ValueError("no areas to lay out")
    areas = fit_areas(areas, container.area, strict=strict)
    order = sorted(range(len(areas)), key=lambda i: (-areas.areas[i], areas.ids[i]))
    vals = [areas.areas[i] for i in order]
    ids = [areas.ids[i] for i in order]
    return areas, vals, ids


def _finish(container: Rect, areas: AreaList, ids, boxes) -> Layout:
    cells = {i: Rect(*(float(v) for v in b)) for i, b in zip(ids, boxes)}
    return Layout(container, cells, areas.name_map())


def _cut(q: Box, s1: float, vertical: bool) -> tuple[Box, Box]:
    """Split q so the first piece has area s1: left piece if vertical, else top."""
    x, y, w, h = q
    if vertical:
        w1 = s1 / h
        w2 = w - w1
        if not w2 > 0:
            w2 = (w * h - s1) / h
        return (x, y, w1, h), (x + w1, y, w2, h)
    h1 = s1 / w
    h2 = h - h1
    if not h2 > 0:
        h2 = (w * h - s1) / w
    return (x, y + h2, w, h1), (x, y, w, h2)


# ---------------------------------------------------------------- squarified

def _worst(total: float, big: float, small: float, side: float) -> float:
    s2 = side * side
    t2 = total * total
    return max(s2 * big / t2, t2 / (s2 * small))


def squarify_boxes(vals: list[float], q: Box) -> list[Box]:
    """Squarified strips for descending ``vals`` filling box q exactly."""
    n = len(vals)
    boxes: list[Box] = [None] * n
    x, y, w, h = q
    i = 0
    while i < n:
        if i == n - 1:
            boxes[i] = (x, y, w, h)
            break
        side = min(w, h)
        total = vals[i]
        j = i + 1
        cur = _worst(total, vals[i], vals[i], side)
        while j < n:
            nxt = _worst(total + vals[j], vals[i], vals[j], side)
            if nxt > cur:
                break
            total += vals[j]
            cur = nxt
            j += 1
        if w >= h:
            # strip is a column on the left, filled top to bottom
            t = total / h if j < n else w
            cy = y + h
            for m in range(i, j):
                ch = vals[m] / t if m < j - 1 else cy - y
                cy -= ch
                boxes[m] = (x, cy, t, ch)
            x, w = x + t, w - t
        else:
            # strip is a row on top, filled left to right
            t = total / w if j < n else h
            cx = x
            for m in range(i, j):
                cw = vals[m] / t if m < j - 1 else x + w - cx
                boxes[m] = (cx, y + h - t, cw, t)
                cx += cw
            h = h - t
        i = j
    return boxes


def squarified(container: Rect, areas: AreaList, strict: bool = False) -> Layout:
    """Greedy strips along the shorter side of the remaining space."""
    areas, vals, ids = _prepare(container, areas, strict)
    return _finish(container, areas, ids, squarify_boxes(vals, container.as_tuple()))


# ------------------------------------------------------------ divide & conquer

def _split_index(pre: list[float], gsum: list[float], s: int, e: int) -> int:
    """First k in [s, e-1] past which moving one more area worsens |S1 - S2|.

    |S1-S2| grows at k+1 iff pre[k+1] + pre[k+2] > pre[s] + pre[e+1], and the
    left side is increasing in k, so a bisection finds it.
    """
    m = bisect_right(gsum, pre[s] + pre[e + 1], s + 1, e)
    return m - 1


class _DC:
    def __init__(self, vals, c: float | None, budget: int | None):
        self.vals = vals
        self.pre = [0.0] + list(accumulate(vals))
        self.gsum = [self.pre[m] + self.pre[m + 1] for m in range(len(vals))]
        self.c = c
        self.calls = 0
        self.budget = budget

    def fires(self, s: int, e: int, k: int) -> bool:
        if self.c is None:
            return False
        if self.budget is not None and self.calls > self.budget:
            return False
        a = self.vals
        return abs(a[max(s, k - 1)] - a[k]) > self.c * abs(a[k] - a[min(k + 1, e)])

    def solve(self, q: Box, s: int, e: int, out: dict) -> float:
        """Lay out vals[s..e] in q, writing boxes into out; returns sum(w+h)."""
        per = 0.0
        stack = [(q, s, e)]
        while stack:
            q, s, e = stack.pop()
            self.calls += 1
            if s == e:
                out[s] = q
                per += q[2] + q[3]
                continue
            k = _split_index(self.pre, self.gsum, s, e)
            vertical = q[2] >= q[3]
            if self.fires(s, e, k):
                best = None
                for e1 in (k - 1, k + 1):
                    if e1 < s or e1 >= e:
                        continue
                    q1, q2 = _cut(q, self.pre[e1 + 1] - self.pre[s], vertical)
                    trial: dict = {}
                    p = self.solve(q1, s, e1, trial) + self.solve(q2, e1 + 1, e, trial)
                    if best is None or p < best[0]:
                        best = (p, trial)
                if best is not None:
                    out.update(best[1])
                    per += best[0]
                    continue
            q1, q2 = _cut(q, self.pre[k + 1] - self.pre[s], vertical)
            stack.append((q2, k + 1, e))
            stack.append((q1, s, k))
        return per


def dc_baseline(container: Rect, areas: AreaList, strict: bool = False) -> Layout:
    """Recursive balanced split of the sorted list (equal-weight halves)."""
    areas, vals, ids = _prepare(container, areas, strict)
    out: dict = {}
    _DC(vals, None, None).solve(container.as_tuple(), 0, len(vals) - 1, out)
    return _finish(container, areas, ids, [out[m] for m in range(len(vals))])


def modified_dc(container: Rect, areas: AreaList, c: SplitConstant | float = SplitConstant(),
                strict: bool = False) -> Layout:
    """Balanced split, but at an extreme gap try both neighbouring splits.

    Double-branching stays enabled while the total number of recursive calls
    is at most (2n - 1) + 2n, i.e. plain DC plus 2n extra calls.
    """
    c = c.c if isinstance(c, SplitConstant) else float(c)
    areas, vals, ids = _prepare(container, areas, strict)
    n = len(vals)
    out: dict = {}
    _DC(vals, c, 4 * n - 1).solve(container.as_tuple(), 0, n - 1, out)
    return _finish(container, areas, ids, [out[m] for m in range(n)])


# ---------------------------------------------------------- dynamic programming
#
# A contiguous run of areas with total S placed in a box of width w has
# height S/w, and any fixed slicing tree costs sum(w_i + h_i) = a*w + b/w for
# constants a, b >= 0. The best cost over all trees is therefore the lower
# envelope of such curves, which only depends on the lower-left convex hull of
# the (a, b) points. Stacking two runs adds their costs at the same w (a
# Minkowski sum of hulls); placing them side by side scales each child's
# width by its share of the area, mapping (a, b) to (a*s, b/s).

def _lower_hull(a: np.ndarray, b: np.ndarray):
    order = np.lexsort((b, a))
    a = a[order]
    b = b[order]
    prevmin = np.minimum.accumulate(np.concatenate(([np.inf], b[:-1])))
    keep = b < prevmin
    a = a[keep]
    b = b[keep]
    while len(a) > 2:
        cross = (a[1:-1] - a[:-2]) * (b[2:] - b[:-2]) - (b[1:-1] - b[:-2]) * (a[2:] - a[:-2])
        bad = cross <= 0
        if not bad.any():
            break
        keep = np.ones(len(a), bool)
        keep[1:-1] = ~bad
        a = a[keep]
        b = b[keep]
    return a, b


def _trim(a, b, wmin: float, wmax: float):
    """Drop hull points that are never the minimum for w in [wmin, wmax]."""
    if len(a) <= 1:
        return a, b
    s = -np.diff(b) / np.diff(a)  # point m is optimal for w^2 in [s[m], s[m-1]]
    hi = np.concatenate(([np.inf], s))
    lo = np.concatenate((s, [0.0]))
    keep = (hi >= wmin * wmin * (1 - 1e-12)) & (lo <= wmax * wmax * (1 + 1e-12))
    return a[keep], b[keep]


def _combine(env, pre, i: int, j: int, W: float, H: float):
    S = pre[j + 1] - pre[i]
    ks = np.arange(i, j)
    m = len(ks)
    s1 = (pre[ks + 1] - pre[i]) / S
    s2 = (pre[j + 1] - pre[ks + 1]) / S
    left = [env[(i, k)] for k in range(i, j)]
    right = [env[(k + 1, j)] for k in range(i, j)]
    ln = np.array([len(p[0]) for p in left])
    rn = np.array([len(p[0]) for p in right])
    LA = np.concatenate([p[0] for p in left])
    LB = np.concatenate([p[1] for p in left])
    RA = np.concatenate([p[0] for p in right])
    RB = np.concatenate([p[1] for p in right])
    # groups 0..m-1 stack the two runs, groups m..2m-1 put them side by side
    lidx = np.repeat(np.arange(m), ln)
    ridx = np.repeat(np.arange(m), rn)
    LAg = np.concatenate((LA, LA * s1[lidx]))
    LBg = np.concatenate((LB, LB / s1[lidx]))
    RAg = np.concatenate((RA, RA * s2[ridx]))
    RBg = np.concatenate((RB, RB / s2[ridx]))
    lg = np.concatenate((lidx, lidx + m))
    rg = np.concatenate((ridx, ridx + m))
    lstart = np.concatenate(([0], np.cumsum(ln)[:-1]))
    rstart = np.concatenate(([0], np.cumsum(rn)[:-1]))
    lst = np.concatenate((lstart, lstart + len(LA)))
    rst = np.concatenate((rstart, rstart + len(RA)))
    baseA = LAg[lst] + RAg[rst]
    baseB = LBg[lst] + RBg[rst]
    # Minkowski sum per group: merge hull edges by angle, starting from the
    # sum of the two first points
    lmask = np.ones(len(LAg), bool)
    lmask[lst] = False
    rmask = np.ones(len(RAg), bool)
    rmask[rst] = False
    eA = np.concatenate((np.diff(LAg, prepend=0)[lmask], np.diff(RAg, prepend=0)[rmask]))
    eB = np.concatenate((np.diff(LBg, prepend=0)[lmask], np.diff(RBg, prepend=0)[rmask]))
    eg = np.concatenate((lg[lmask], rg[rmask]))
    if len(eA):
        o = np.lexsort((np.arctan2(eB, eA), eg))
        eA, eB, eg = eA[o], eB[o], eg[o]
        cA = np.cumsum(eA)
        cB = np.cumsum(eB)
        first = np.concatenate(([True], eg[1:] != eg[:-1]))
        offA = np.concatenate(([0.0], cA[:-1]))[first]
        offB = np.concatenate(([0.0], cB[:-1]))[first]
        gid = np.cumsum(first) - 1
        vA = cA - offA[gid] + baseA[eg[first]][gid]
        vB = cB - offB[gid] + baseB[eg[first]][gid]
        a = np.concatenate((baseA, vA))
        b = np.concatenate((baseB, vB))
    else:
        a, b = baseA, baseB
    a, b = _lower_hull(a, b)
    return _trim(a, b, S / H, W)


def _hull_min(h, w: float) -> float:
    return float(np.min(h[0] * w + h[1] / w))


def _envelope_dp(vals, W: float, H: float):
    n = len(vals)
    pre = np.concatenate(([0.0], np.cumsum(vals)))
    env = {(i, i): (np.array([1.0]), np.array([vals[i]])) for i in range(n)}
    for length in range(2, n + 1):
        for i in range(0, n - length + 1):
            j = i + length - 1
            env[(i, j)] = _combine(env, pre, i, j, W, H)
    return env, pre


def _envelope_layout(vals, q: Box):
    x0, y0, W, H = q
    env, pre = _envelope_dp(vals, W, H)
    n = len(vals)
    out: dict = {}
    total = 0.0
    stack = [(q, 0, n - 1)]
    while stack:
        q, i, j = stack.pop()
        if i == j:
            out[i] = q
            total += q[2] + q[3]
            continue
        x, y, w, h = q
        S = pre[j + 1] - pre[i]
        best = (math.inf, None, None)
        for k in range(i, j):
            s1 = (pre[k + 1] - pre[i]) / S
            L, R = env[(i, k)], env[(k + 1, j)]
            v = _hull_min(L, s1 * w) + _hull_min(R, (1 - s1) * w)
            hz = _hull_min(L, w) + _hull_min(R, w)
            cand = (v, True) if v <= hz else (hz, False)
            if cand[0] < best[0]:
                best = (cand[0], k, cand[1])
        _, k, vertical = best
        q1, q2 = _cut(q, pre[k + 1] - pre[i], vertical)
        stack.append((q2, k + 1, j))
        stack.append((q1, i, k))
    return [out[m] for m in range(n)], total


def envelope_value(vals, W: float, H: float) -> float:
    """Optimal sum(w+h) over slicing layouts of the given order in a W x H box."""
    env, _ = _envelope_dp(list(vals), W, H)
    return _hull_min(env[(0, len(vals) - 1)], W)


def _quant(v: float) -> float:
    return float(f"{v:.12g}")


class MemoTable(dict):
    """(start, stop, qw, qh) -> (best sum(w+h), cells anchored at the origin)."""

    def lookup(self, s: int, e: int, w: float, h: float):
        return self.get((s, e, _quant(w), _quant(h)))

    def store(self, s: int, e: int, w: float, h: float, value):
        self[(s, e, _quant(w), _quant(h))] = value


def _memo_dp(vals, W: float, H: float, memo: MemoTable | None):
    """Direct recursion over (start, stop, w, h) with translated relative layouts."""
    pre = [0.0] + list(accumulate(vals))

    def best(s, e, w, h):
        if memo is not None:
            hit = memo.lookup(s, e, w, h)
            if hit is not None:
                return hit
        if s == e:
            res = (w + h, ((s, 0.0, 0.0, w, h),))
        else:
            res = (math.inf, ())
            for k in range(s, e):
                S = pre[k + 1] - pre[s]
                w1 = S / h
                pl, cl = best(s, k, w1, h)
                pr, cr = best(k + 1, e, w - w1, h)
                v = pl + pr
                h1 = S / w
                ptop, ct = best(s, k, w, h1)
                pbot, cb = best(k + 1, e, w, h - h1)
                hz = ptop + pbot
                if v <= hz:
                    if v < res[0]:
                        res = (v, cl + tuple((m, x + w1, y, cw, ch) for m, x, y, cw, ch in cr))
                elif hz < res[0]:
                    res = (hz, tuple((m, x, y + h - h1, cw, ch) for m, x, y, cw, ch in ct) + cb)
        if memo is not None:
            memo.store(s, e, w, h, res)
        return res

    return best(0, len(vals) - 1, W, H)


def dynamic_prog(container: Rect, areas: AreaList, method: str = "envelope",
                 strict: bool = False) -> Layout:
    """Minimum total perimeter over all slicing layouts of the sorted list.

    ``method="envelope"`` is the polynomial hull recursion; ``"memo"`` is the
    direct (start, stop, w, h) memoized recursion, exponential in n.
    """
    areas, vals, ids = _prepare(container, areas, strict)
    q = container.as_tuple()
    if method == "envelope":
        boxes, _ = _envelope_layout(vals, q)
    elif method in ("memo", "plain"):
        _, cells = _memo_dp(vals, q[2], q[3], MemoTable() if method == "memo" else None)
        boxes = [None] * len(vals)
        for m, x, y, w, h in cells:
            boxes[m] = (q[0] + x, q[1] + y, w, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish(container, areas, ids, boxes)


# ---------------------------------------------------------------- test oracle

ORACLE_MAX_N = 8


def _trees(s: int, e: int) -> Iterator:
    """Every slicing tree over s..e: leaf index or (k, vertical, left, right)."""
    if s == e:
        yield s
        return
    for k in range(s, e):
        for left in list(_trees(s, k)):
            for right in list(_trees(k + 1, e)):
                yield (k, True, left, right)
                yield (k, False, left, right)


def _place(tree, q: Box, pre, out: dict) -> None:
    if isinstance(tree, int):
        out[tree] = q
        return
    k, vertical, left, right = tree
    s = _first(left)
    q1, q2 = _cut(q, pre[k + 1] - pre[s], vertical)
    _place(left, q1, pre, out)
    _place(right, q2, pre, out)


def _first(tree) -> int:
    while not isinstance(tree, int):
        tree = tree[2]
    return tree


def slicing_oracle(container: Rect, areas: AreaList, strict: bool = False) -> Layout:
    """Brute force over every contiguous slicing tree with both orientations."""
    if len(areas) > ORACLE_MAX_N:
        raise ValueError(f"slicing oracle supports n <= {ORACLE_MAX_N}, got {len(areas)}")
    areas, vals, ids = _prepare(container, areas, strict)
    pre = [0.0] + list(accumulate(vals))
    q = container.as_tuple()
    best = None
    for tree in _trees(0, len(vals) - 1):
        out: dict = {}
        _place(tree, q, pre, out)
        p = math.fsum(b[2] + b[3] for b in out.values())
        if best is None or p < best[0]:
            best = (p, out)
    return _finish(container, areas, ids, [best[1][m] for m in range(len(vals))])
