"""Continuous subproblem: all pair relations (and z) fixed, the rest is convex."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convex import ConvexProgram, kkt_residual, solve_ipm
from .model import Model, Relation, Solution, evaluate_objective, horizontal_flags

SIGMA_TOL = 1e-9
KKT_TOL = 1e-7


@dataclass
class InfeasibilityCertificate:
    """Proof that fixed relations admit no layout.

    ``multipliers`` weight the rows (keyed by (constraint number, indices))
    so that every point violates their combination; ``dual_bound`` > 0 is a
    lower bound on the smallest achievable uniform violation.
    """
    min_violation: float
    dual_bound: float
    multipliers: dict = field(default_factory=dict)
    status: str = "infeasible"


def _relation(r) -> Relation:
    return r if isinstance(r, Relation) else Relation(r)


def _pair_rows(p: ConvexProgram, m: Model, i: int, j: int, rel: Relation, pos: dict, skip=()) -> None:
    """Separation row for a placed pair i < j, unless an adjacency equality implies it."""
    k = len(pos)
    pi, pj = pos[i], pos[j]
    ix, jx = 2 * k + pi, 2 * k + pj
    iy, jy = 3 * k + pi, 3 * k + pj
    if rel is Relation.I_LEFT_OF_J:
        row, label = [(ix, 1), (pi, 1), (jx, -1)], (5, (i, j))
    elif rel is Relation.J_LEFT_OF_I:
        row, label = [(jx, 1), (pj, 1), (ix, -1)], (5, (j, i))
    elif rel is Relation.I_BELOW_J:
        row, label = [(iy, 1), (k + pi, 1), (jy, -1)], (8, (i, j))
    else:
        row, label = [(jy, 1), (k + pj, 1), (iy, -1)], (8, (j, i))
    if (label[0],) + label[1] not in skip:
        p.lin(row, 0.0, label)


def build_program(m: Model, cells: list[int], relations: dict, z: dict | None = None):
    """Convex program over the given cells; returns (program, position map, constant).

    Variables per placed cell: w, h, x, y blocks of length k, then one
    epigraph variable per closeness pair. ``constant`` collects the fixed
    horizontality term.
    """
    p_ = m.params
    W, H = m.container.w, m.container.h
    k = len(cells)
    pos = {c: t for t, c in enumerate(cells)}
    gam = [(i, j) for i, j in zip(*np.nonzero(p_.gamma)) if i in pos and j in pos]
    prog = ConvexProgram(4 * k + len(gam))
    wts = m.weights
    for c, t in pos.items():
        prog.c[t] = wts[c]
        prog.c[k + t] = wts[c]
        prog.area(t, k + t, m.areas.areas[c], (1, (c,)))
        prog.lin([(2 * k + t, -1)], 0.0, (0, (c,), "x"))
        prog.lin([(3 * k + t, -1)], 0.0, (0, (c,), "y"))
        prog.lin([(2 * k + t, 1), (t, 1)], W, (2, (c,)))
        prog.lin([(3 * k + t, 1), (k + t, 1)], H, (3, (c,)))
        if p_.delta[c]:
            prog.lin([(2 * k + t, 1), (3 * k + t, 1)], 0.0, (4, (c,)))
        if z is not None and c in z:
            if z[c]:
                prog.lin([(k + t, 1), (t, -1)], 0.0, (12, (c,)))
            else:
                prog.lin([(t, 1), (k + t, -1)], 0.0, (13, (c,)))
    # adjacency: right edge of i meets left edge of j (eta), same vertically (theta)
    touching = set()
    for mat, off, num in ((p_.eta, 2 * k, 6), (p_.theta, 3 * k, 9)):
        for i, j in zip(*np.nonzero(mat)):
            if i in pos and j in pos:
                size = pos[i] if off == 2 * k else k + pos[i]
                prog.eq([(off + pos[i], 1), (size, 1), (off + pos[j], -1)], 0.0, (num, (int(i), int(j))))
                touching.add((num - 1, int(i), int(j)))
    for (i, j), rel in relations.items():
        if i in pos and j in pos:
            a, b = (i, j) if i < j else (j, i)
            _pair_rows(prog, m, a, b, _relation(rel), pos, touching)
    for r, (i, j) in enumerate(gam):
        t = 4 * k + r
        prog.c[t] = 1.0
        prog.dist(2 * k + pos[i], 2 * k + pos[j], 3 * k + pos[i], 3 * k + pos[j], t, ("norm", (int(i), int(j))))
    const = 0.0
    if z is not None and p_.beta:
        const = -p_.beta * math.fsum(wts[c] * z[c] for c in cells if c in z)
    return prog, pos, const


def start_point(m: Model, prog: ConvexProgram, cells: list[int], relations: dict) -> np.ndarray:
    """Square cells packed by longest paths of the relation graph, shrunk into the container."""
    k = len(cells)
    pos = {c: t for t, c in enumerate(cells)}
    s = np.sqrt(np.asarray([m.areas.areas[c] for c in cells], float))
    x = np.zeros(k)
    y = np.zeros(k)
    left, below = [], []
    for (i, j), rel in relations.items():
        if i not in pos or j not in pos:
            continue
        a, b = (i, j) if i < j else (j, i)
        rel = _relation(rel)
        if rel is Relation.I_LEFT_OF_J:
            left.append((pos[a], pos[b]))
        elif rel is Relation.J_LEFT_OF_I:
            left.append((pos[b], pos[a]))
        elif rel is Relation.I_BELOW_J:
            below.append((pos[a], pos[b]))
        else:
            below.append((pos[b], pos[a]))
    for _ in range(k):
        for a, b in left:
            x[b] = max(x[b], x[a] + s[a])
        for a, b in below:
            y[b] = max(y[b], y[a] + s[a])
    W, H = m.container.w, m.container.h
    fx = 0.98 * W / max(float(np.max(x + s)), W)
    fy = 0.98 * H / max(float(np.max(y + s)), H)
    v = np.zeros(prog.nv)
    v[:k] = s * fx
    v[k:2 * k] = s * fy
    v[2 * k:3 * k] = x * fx + 0.005 * W / k
    v[3 * k:4 * k] = y * fy + 0.005 * H / k
    for a, b, c, d, t, _ in prog.dists:
        v[t] = math.hypot(v[a] - v[b], v[c] - v[d]) + 1.0
    return v


def _rects(v: np.ndarray, cells: list[int], n: int):
    k = len(cells)
    out = [None] * n
    for t, c in enumerate(cells):
        out[c] = (max(0.0, float(v[2 * k + t])), max(0.0, float(v[3 * k + t])), float(v[t]), float(v[k + t]))
    return out


def solve_relaxed(m: Model, cells: list[int], relations: dict, z: dict | None = None,
                  M: float = 1e3, maxit: int = 200):
    """Solve the convex program over ``cells`` with a verified feasibility verdict.

    Returns (kind, result, program, constant) with kind one of "solved",
    "infeasible" (result is the phase-one IPMResult) or "unconverged".
    """
    prog, _, const = build_program(m, cells, relations, z)
    v0 = start_point(m, prog, cells, relations)
    while True:
        r = solve_ipm(prog, v0, M=M, maxit=maxit)
        if r.converged and r.sigma <= SIGMA_TOL:
            return "solved", r, prog, const
        p1 = solve_ipm(prog, v0, maxit=maxit, phase1=True)
        if p1.converged and p1.sigma - p1.gap > SIGMA_TOL:
            return "infeasible", p1, prog, const
        if not r.converged or M >= 1e7:
            return "unconverged", r, prog, const
        M *= 100


def solve_subproblem(m: Model, fixed_relations: dict, fixed_z=None):
    """Minimize the objective with every pair relation (and z) fixed.

    ``fixed_relations`` maps each unordered pair (i, j), i < j, to a Relation
    (or its string value). ``fixed_z`` is a sequence of 0/1 per cell; it is
    required when beta > 0 because z then enters the objective.
    Returns a Solution (status optimal when the KKT residual is at most 1e-7,
    unconverged otherwise) or an InfeasibilityCertificate.
    """
    n = m.n
    rel = {}
    for (i, j), r in fixed_relations.items():
        rel[(min(i, j), max(i, j))] = r if i < j else _swap(_relation(r))
    missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in rel]
    if missing:
        raise ValueError(f"pair {missing[0]} has no relation")
    if m.params.beta > 0 and fixed_z is None:
        raise ValueError("beta > 0 needs fixed_z")
    z = None if fixed_z is None else {i: int(fixed_z[i]) for i in range(n)}
    kind, r, prog, const = solve_relaxed(m, list(range(n)), rel, z)
    if kind == "infeasible":
        labels = prog.row_labels()
        mult = {labels[t]: float(l) for t, l in enumerate(r.multipliers[:-1]) if l > 1e-9}
        mult.update({lab: float(l) for lab, l in zip(prog.eq_labels, r.eq_multipliers) if abs(l) > 1e-9})
        return InfeasibilityCertificate(r.sigma, r.sigma - r.gap, mult)
    rects = _rects(r.v, list(range(n)), n)
    zz = tuple(z[i] for i in range(n)) if z is not None else horizontal_flags(rects)
    sol = Solution(rects, zz, 0.0, 2.0 * math.fsum(w + h for _, _, w, h in rects), -math.inf,
                   "unconverged", relations=dict(rel))
    sol.objective = evaluate_objective(m, sol)
    if kind == "solved":
        sol.kkt_residual = kkt_residual(prog, r.v, r.multipliers, r.eq_multipliers)
        sol.bound = r.objective - r.gap + const
        if sol.kkt_residual <= KKT_TOL:
            sol.status = "optimal"
    return sol


def _swap(r: Relation) -> Relation:
    return {Relation.I_LEFT_OF_J: Relation.J_LEFT_OF_I, Relation.J_LEFT_OF_I: Relation.I_LEFT_OF_J,
            Relation.I_BELOW_J: Relation.J_BELOW_I, Relation.J_BELOW_I: Relation.I_BELOW_J}[r]
