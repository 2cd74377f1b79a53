"""Depth-first branch and bound over pairwise relations.

Cells are inserted in descending area order into a sequence pair; each
insertion fixes the relations between the new cell and all placed ones, so
the largest area products are decided first. A node's bound is the convex
relaxation over its placed cells plus the cheapest possible cost of the
cells still to come.

Without closeness, corner or adjacency parameters the relaxations of all
children are solved as one batch and screened by a dual ascent first;
otherwise every node gets its own convex solve.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from ..geometry import Layout
from .batch import ascent, sequence_children, solve_batch
from .model import Model, Relation, Solution, check_feasibility, evaluate_objective, horizontal_flags, \
    solution_from_layout
from .subproblem import solve_relaxed, solve_subproblem


@dataclass
class SolveConfig:
    node_limit: int = 1_000_000
    time_limit: float | None = None  # seconds
    warm_start: Layout | None = None  # default: the dynamic programming layout
    symmetry: bool = False  # drop mirror images of the first pair (preference parameters zero only)
    max_n: int = 9
    gap: float = 1e-5  # relative optimality gap
    screen_rounds: int = 10


class _Search:
    def __init__(self, m: Model, cfg: SolveConfig):
        self.m = m
        self.cfg = cfg
        n = m.n
        A = np.asarray(m.areas.areas, float)
        self.order = sorted(range(n), key=lambda i: (-A[i], i))
        self.A = A[self.order]
        self.cw = m.weights[self.order]
        beta = m.params.beta
        self.zmode = beta > 0
        base = self.cw * (2 * np.sqrt(self.A) - beta)
        self.rest = [float(math.fsum(base[k:])) for k in range(n + 1)]
        self.best: Solution | None = None
        self.inc = math.inf
        self.floor = math.inf  # smallest bound of anything discarded without proof of optimality
        self.nodes = 0
        self.stopped = False
        self.t0 = time.monotonic()

    # bookkeeping

    def threshold(self) -> float:
        if not math.isfinite(self.inc):
            return math.inf
        return self.inc - 0.1 * self.cfg.gap * max(1.0, abs(self.inc))

    def discard(self, lb: float) -> None:
        self.floor = min(self.floor, lb)

    def out_of_budget(self) -> bool:
        if self.stopped:
            return True
        lim = self.cfg.time_limit
        if self.nodes >= self.cfg.node_limit or (lim is not None and time.monotonic() - self.t0 > lim):
            self.stopped = True
        return self.stopped

    def offer(self, sol: Solution) -> None:
        if check_feasibility(self.m, sol):
            return
        if sol.objective < self.inc:
            self.inc = sol.objective
            self.best = sol
        else:
            self.discard(sol.objective)

    def relations(self, left: np.ndarray, below: np.ndarray, k: int) -> dict:
        """Relations of the placed cells in model indices, keyed by i < j."""
        out = {}
        o = self.order
        for a in range(k):
            for b in range(k):
                if left[a, b] or below[a, b]:
                    i, j = o[a], o[b]
                    if left[a, b]:
                        r = Relation.I_LEFT_OF_J if i < j else Relation.J_LEFT_OF_I
                    else:
                        r = Relation.I_BELOW_J if i < j else Relation.J_BELOW_I
                    out[(min(i, j), max(i, j))] = r
        return out

    def allowed(self, left: np.ndarray, below: np.ndarray) -> np.ndarray:
        """Children compatible with the corner and adjacency parameters."""
        p = self.m.params
        o = np.asarray(self.order[:left.shape[1]])
        ok = np.ones(len(left), bool)
        d = p.delta[o]
        if d.any():
            c = int(np.nonzero(d)[0][0])
            ok &= ~(left[:, :, c].any(1) | below[:, :, c].any(1))
        eta = p.eta[np.ix_(o, o)]
        theta = p.theta[np.ix_(o, o)]
        ok &= ~((eta[None] == 1) & ~left).any((1, 2))
        ok &= ~((theta[None] == 1) & ~below).any((1, 2))
        return ok

    def symmetric_subset(self, left: np.ndarray, below: np.ndarray) -> np.ndarray:
        W, H = self.m.container.w, self.m.container.h
        keep = left[:, 0, 1].copy()
        if not (W == H and not self.zmode):
            keep |= below[:, 0, 1]
        return keep

    # fast path

    def fast(self, gp, gm, zs, vpar, flows, parent_lb):
        n = self.m.n
        k = len(gp) + 1
        kids, left, below = sequence_children(gp, gm, k - 1)
        zk = [()] * len(kids)
        if self.zmode:
            kids = [kd for kd in kids for _ in (1, 0)]
            left = np.repeat(left, 2, 0)
            below = np.repeat(below, 2, 0)
            zk = [zs + (z,) for _ in range(len(kids) // 2) for z in (1, 0)]
        if self.cfg.symmetry and k == 2:
            keep = np.nonzero(self.symmetric_subset(left, below))[0]
            kids = [kids[i] for i in keep]
            zk = [zk[i] for i in keep]
            left, below = left[keep], below[keep]
        B = len(kids)
        orient = zconst = None
        if self.zmode:
            Z = np.asarray(zk, float)
            orient = 2 * Z - 1
            zconst = -self.m.params.beta * (Z @ self.cw[:k])
        extra = self.rest[k] + (0.0 if zconst is None else zconst)
        self.nodes += B
        thr = self.threshold()
        if flows is not None and self.cfg.screen_rounds:
            F, FT, G, GT = flows
            F = np.repeat(np.append(F, 0)[None], B, 0)
            G = np.repeat(np.append(G, 0)[None], B, 0)
            FT = np.full(B, FT)
            GT = np.full(B, GT)
            *_, bd = ascent(self.A[:k], self.cw[:k], self.m.container.w, self.m.container.h, left, below,
                            F, FT, G, GT, rounds=self.cfg.screen_rounds, stop=thr, extra=extra, orient=orient)
            bd = bd + extra
            cut = bd >= thr
            if cut.any():
                self.discard(float(bd[cut].min()))
            keep = np.nonzero(~cut)[0]
            if len(keep) == 0:
                return
            kids = [kids[i] for i in keep]
            zk = [zk[i] for i in keep]
            left, below = left[keep], below[keep]
            if self.zmode:
                orient, zconst = orient[keep], zconst[keep]
        leaf = k == n
        status, lb, obj, V, FL = solve_batch(self.A, self.cw, self.m.container.w, self.m.container.h,
                                             left, below, vpar, self.rest[k], thr, orient, zconst, leaf=leaf)
        lb = np.maximum(lb, parent_lb)
        if leaf:
            for b in range(len(kids)):
                if status[b] == 1:
                    self.discard(float(lb[b]))
                elif status[b] == 2:
                    self.offer(self.leaf_solution(V[b], left[b], below[b], zk[b]))
                else:
                    self.discard(float(lb[b]))
            return
        for b in np.argsort(lb, kind="stable"):
            if status[b] == 1 or lb[b] >= self.threshold():
                self.discard(float(lb[b]))
                continue
            if self.out_of_budget():
                self.discard(float(lb[b]))
                continue
            self.fast(kids[b][0], kids[b][1], zk[b], V[b], tuple(x[b] for x in FL), float(lb[b]))

    def leaf_solution(self, v, left, below, zs) -> Solution:
        n = self.m.n
        w, h = v[:n], v[n:2 * n]
        # compact along the relation graphs: separation rows hold exactly
        x = np.zeros(n)
        y = np.zeros(n)
        for _ in range(n):
            x = np.max(np.where(left, (x + w)[:, None], 0.0), 0)
            y = np.max(np.where(below, (y + h)[:, None], 0.0), 0)
        rects = [None] * n
        for a, i in enumerate(self.order):
            rects[i] = (float(x[a]), float(y[a]), float(w[a]), float(h[a]))
        if self.zmode:
            z = [0] * n
            for a, i in enumerate(self.order):
                z[i] = zs[a]
            z = tuple(z)
        else:
            z = horizontal_flags(rects)
        s = Solution(rects, z, 0.0, 2.0 * math.fsum(r[2] + r[3] for r in rects), -math.inf, "feasible",
                     relations=self.relations(left, below, n))
        s.objective = evaluate_objective(self.m, s)
        return s

    # general path

    def general(self, gp, gm, zs, parent_lb):
        n = self.m.n
        k = len(gp) + 1
        kids, left, below = sequence_children(gp, gm, k - 1)
        ok = self.allowed(left, below)
        idx = [b for b in range(len(kids)) if ok[b]]
        items = []
        for b in idx:
            for z in ((1, 0) if self.zmode else (None,)):
                items.append((b, zs + (z,) if self.zmode else zs))
        cells = self.order[:k]
        scored = []
        for b, zz in items:
            if self.out_of_budget():
                self.discard(parent_lb)
                return
            self.nodes += 1
            rel = self.relations(left[b], below[b], k)
            zd = {self.order[a]: zz[a] for a in range(k)} if self.zmode else None
            if k == n:
                sol = solve_subproblem(self.m, rel, None if zd is None else [zd[i] for i in range(n)])
                if sol.status == "infeasible":
                    continue
                if sol.status != "optimal":
                    self.discard(parent_lb)
                    continue
                self.offer(sol)
                continue
            kind, r, _, const = solve_relaxed(self.m, cells, rel, zd)
            if kind == "infeasible":
                continue
            if kind == "unconverged":
                lb = parent_lb
            else:
                lb = max(parent_lb, r.objective - r.gap + const + self.rest[k])
            scored.append((lb, len(scored), b, zz))
        for lb, _, b, zz in sorted(scored):
            if lb >= self.threshold() or self.out_of_budget():
                self.discard(lb)
                continue
            self.general(kids[b][0], kids[b][1], zz, lb)


def _config(config) -> SolveConfig:
    if config is None:
        return SolveConfig()
    if isinstance(config, SolveConfig):
        return config
    return replace(SolveConfig(), **dict(config))


def solve(m: Model, config: SolveConfig | dict | None = None) -> Solution:
    """Optimal layout by branch and bound.

    Returns the best layout found with a global lower bound; status is
    optimal when the bound closes the gap, node-limit when a node or time
    limit stopped the search, infeasible when no layout exists.
    """
    cfg = _config(config)
    n = m.n
    if n > cfg.max_n:
        raise ValueError(f"{n} cells exceed the configured maximum of {cfg.max_n}")
    S = _Search(m, cfg)
    warm = cfg.warm_start
    if warm is None:
        from ..subdivision import dynamic_prog
        try:
            warm = dynamic_prog(m.container, m.areas)
        except ValueError:
            warm = None
    if warm is not None:
        s0 = solution_from_layout(m, warm)
        S.offer(s0)
    if m.params.positional:
        S.general([], [], (), -math.inf)
    else:
        S.fast([], [], (), None, None, -math.inf)
    best = S.best
    bound = min(S.inc, S.floor)
    if best is None:
        status = "node-limit" if S.stopped else "infeasible"
        return Solution([], None, math.inf, math.inf, bound, status, nodes=S.nodes)
    best.bound = bound
    best.nodes = S.nodes
    if S.stopped and S.inc - bound > cfg.gap * abs(S.inc):
        best.status = "node-limit"
    elif S.inc - bound <= cfg.gap * max(abs(S.inc), 1e-12):
        best.status = "optimal"
    else:
        best.status = "feasible"
    return best
