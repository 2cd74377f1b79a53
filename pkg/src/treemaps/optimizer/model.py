"""The perimeter-minimization MINLP: parameters, variables, constraints.

Cells are indexed 0..n-1 in AreaList order. Binary semantics:

* x[i][j] = 0 means cell i lies entirely left of cell j (x_i + w_i <= x_j)
* y[i][j] = 0 means cell i lies entirely below cell j
* z[i] = 1 marks a horizontal cell (h_i <= w_i)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..geometry import Layout, Rect
from ..treemodel import AreaList


class ModelValidationError(ValueError):
    pass


class Relation(str, Enum):
    """Placement of an unordered pair (i, j) with i < j."""
    I_LEFT_OF_J = "i-left-of-j"
    J_LEFT_OF_I = "j-left-of-i"
    I_BELOW_J = "i-below-j"
    J_BELOW_I = "j-below-i"


def _matrix(m, n: int, name: str) -> np.ndarray:
    if m is None:
        return np.zeros((n, n), dtype=int)
    a = np.asarray(m, dtype=int)
    if a.shape != (n, n):
        raise ModelValidationError(f"{name} must be {n}x{n}, got shape {a.shape}")
    if not np.isin(a, (0, 1)).all():
        raise ModelValidationError(f"{name} entries must be 0 or 1")
    if np.any(np.diag(a)):
        i = int(np.nonzero(np.diag(a))[0][0])
        raise ModelValidationError(f"{name}[{i}][{i}] must be 0")
    return a


@dataclass(frozen=True)
class ModelParams:
    alpha: int = 0
    beta: float = 0.0
    gamma: Sequence[Sequence[int]] | None = None
    delta: Sequence[int] | None = None
    eta: Sequence[Sequence[int]] | None = None
    theta: Sequence[Sequence[int]] | None = None
    epsilon: float | None = None  # default 1e-6 * max(W, H)

    def resolved(self, n: int, container: Rect) -> "ResolvedParams":
        """Check the parameter invariants for n cells and fill in defaults."""
        if self.alpha not in (0, 1):
            raise ModelValidationError("alpha must be 0 or 1")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ModelValidationError("beta must be a finite non-negative number")
        gamma = _matrix(self.gamma, n, "gamma")
        eta = _matrix(self.eta, n, "eta")
        theta = _matrix(self.theta, n, "theta")
        delta = np.zeros(n, dtype=int) if self.delta is None else np.asarray(self.delta, dtype=int)
        if delta.shape != (n,) or not np.isin(delta, (0, 1)).all():
            raise ModelValidationError(f"delta must be a 0/1 vector of length {n}")
        if delta.sum() > 1:
            raise ModelValidationError(f"at most one delta may be set, got cells {np.nonzero(delta)[0].tolist()}")
        for name, m in (("eta", eta), ("theta", theta)):
            both = np.argwhere((m + m.T) > 1)
            if len(both):
                i, j = sorted(both[0].tolist())
                raise ModelValidationError(f"{name}[{i}][{j}] and {name}[{j}][{i}] are both set for pair ({i}, {j})")
        eps = self.epsilon if self.epsilon is not None else 1e-6 * max(container.w, container.h)
        if not eps > 0:
            raise ModelValidationError("epsilon must be positive")
        return ResolvedParams(self.alpha, float(self.beta), gamma, delta, eta, theta, float(eps))


@dataclass(frozen=True)
class ResolvedParams:
    alpha: int
    beta: float
    gamma: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    theta: np.ndarray
    epsilon: float

    @property
    def positional(self) -> bool:
        """True when positions enter the objective or side constraints."""
        return bool(self.gamma.any() or self.delta.any() or self.eta.any() or self.theta.any())


@dataclass(frozen=True)
class Constraint:
    number: int
    indices: tuple[int, ...]
    text: str


@dataclass(frozen=True)
class Model:
    container: Rect
    areas: AreaList
    params: ResolvedParams
    continuous: tuple[str, ...]
    binary: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    @property
    def n(self) -> int:
        return len(self.areas)

    @property
    def weights(self) -> np.ndarray:
        """Objective weight of each cell: 1, or its area when alpha = 1."""
        A = np.asarray(self.areas.areas, dtype=float)
        return (1 - self.params.alpha) + self.params.alpha * A

    def export(self) -> str:
        return export_model(self)


@dataclass
class Solution:
    rects: list[tuple[float, float, float, float]]  # (x, y, w, h) per cell index
    z: tuple[int, ...] | None
    objective: float
    reported_perimeter: float
    bound: float
    status: str  # optimal | feasible | infeasible | node-limit | unconverged
    nodes: int = 0
    kkt_residual: float | None = None
    relations: dict | None = None

    def to_layout(self, m: Model) -> Layout:
        if self.status == "infeasible" or not self.rects:
            raise ValueError("solution holds no layout")
        ox, oy = m.container.x, m.container.y
        cells = {m.areas.ids[i]: Rect(x + ox, y + oy, w, h) for i, (x, y, w, h) in enumerate(self.rects)}
        return Layout(m.container, cells, m.areas.name_map())


@dataclass(frozen=True)
class Violation:
    constraint: int  # 0 marks variable domains (non-negativity)
    indices: tuple[int, ...]
    magnitude: float

    def __str__(self) -> str:
        return f"({self.constraint}) at {self.indices}: violated by {self.magnitude:.3g}"


def build_model(container: Rect, areas: AreaList, params: ModelParams = ModelParams()) -> Model:
    n = len(areas)
    if n == 0:
        raise ModelValidationError("no areas")
    p = params.resolved(n, container)
    cont = tuple(f"{v}_{i}" for v in ("w", "h", "vx", "vy") for i in range(n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    binary = tuple(f"x_{i}_{j}" for i, j in pairs) + tuple(f"y_{i}_{j}" for i, j in pairs) \
        + tuple(f"z_{i}" for i in range(n))
    W, H = container.w, container.h
    cons = []
    for i in range(n):
        cons.append(Constraint(1, (i,), f"log({areas.areas[i]!r}) - log(w_{i}) - log(h_{i}) <= 0"))
        cons.append(Constraint(2, (i,), f"vx_{i} + w_{i} <= {W!r}"))
        cons.append(Constraint(3, (i,), f"vy_{i} + h_{i} <= {H!r}"))
        cons.append(Constraint(4, (i,), f"vx_{i} + vy_{i} <= {(W + H) * (1 - p.delta[i])!r}"))
    for i, j in pairs:
        e, t = p.eta[i, j], p.theta[i, j]
        cons.append(Constraint(5, (i, j), f"vx_{i} - vx_{j} + w_{i} - {W!r}*x_{i}_{j} <= 0"))
        cons.append(Constraint(6, (i, j), f"vx_{i} - vx_{j} + w_{i} >= ({p.epsilon!r} - {W!r}*(1 - x_{i}_{j}))*{1 - e}"))
        cons.append(Constraint(7, (i, j), f"x_{i}_{j} <= {1 - e}"))
        cons.append(Constraint(8, (i, j), f"vy_{i} - vy_{j} + h_{i} - {H!r}*y_{i}_{j} <= 0"))
        cons.append(Constraint(9, (i, j), f"vy_{i} - vy_{j} + h_{i} >= ({p.epsilon!r} - {H!r}*(1 - y_{i}_{j}))*{1 - t}"))
        cons.append(Constraint(10, (i, j), f"y_{i}_{j} <= {1 - t}"))
    for i, j in itertools.combinations(range(n), 2):
        cons.append(Constraint(11, (i, j), f"x_{i}_{j} + x_{j}_{i} + y_{i}_{j} + y_{j}_{i} <= 3"))
    for i in range(n):
        cons.append(Constraint(12, (i,), f"w_{i} >= h_{i} - {H!r}*(1 - z_{i})"))
        cons.append(Constraint(13, (i,), f"h_{i} >= w_{i} - {W!r}*z_{i}"))
    return Model(container, areas, p, cont, binary, tuple(cons))


def export_model(m: Model) -> str:
    """Plain-text listing: objective, variables, one constraint per line."""
    p = m.params
    lines = [f"# container {m.container.w!r} x {m.container.h!r}, n = {m.n}",
             f"# alpha = {p.alpha}, beta = {p.beta!r}, epsilon = {p.epsilon!r}"]
    terms = [f"{wt!r}*(w_{i} + h_{i} - {p.beta!r}*z_{i})" for i, wt in enumerate(m.weights)]
    for i, j in zip(*np.nonzero(p.gamma)):
        terms.append(f"norm(vx_{i} - vx_{j}, vy_{i} - vy_{j})")
    lines.append("minimize " + " + ".join(terms))
    lines.append("continuous " + " ".join(m.continuous) + "  (all >= 0)")
    lines.append("binary " + " ".join(m.binary))
    for c in m.constraints:
        lines.append(f"({c.number}) {c.text}")
    return "\n".join(lines) + "\n"


def _pair_violation(xi, yi, wi, hi, xj, yj, wj, hj, W, H, eps, eta_ij, eta_ji, th_ij, th_ji,
                    bx: tuple[int, int, int, int]):
    """Worst violation of (5)-(11) for one pair under binaries (x_ij, x_ji, y_ij, y_ji)."""
    x_ij, x_ji, y_ij, y_ji = bx
    out = []
    for (a, b, ab, e, cap, pa, pb, da) in (
        (xi, xj, x_ij, eta_ij, W, 5, 6, wi), (xj, xi, x_ji, eta_ji, W, 5, 6, wj),
        (yi, yj, y_ij, th_ij, H, 8, 9, hi), (yj, yi, y_ji, th_ji, H, 8, 9, hj),
    ):
        lhs = a - b + da
        out.append((pa, max(0.0, lhs - cap * ab)))
        out.append((pb, max(0.0, (eps - cap * (1 - ab)) * (1 - e) - lhs)))
        out.append((pa + 2, max(0.0, ab - (1 - e))))
    out.append((11, max(0.0, x_ij + x_ji + y_ij + y_ji - 3.0)))
    return out


def check_feasibility(m: Model, s: Solution, tol: float = 1e-6) -> list[Violation]:
    """Every constraint violated by more than ``tol``.

    The pair binaries are not stored in a Solution; for each pair the
    assignment with the smallest worst violation is used, so a layout is
    reported feasible iff some binary completion satisfies (5)-(11). z is
    taken from the solution when present, otherwise chosen the same way.
    """
    n = m.n
    if s.status == "infeasible" or len(s.rects) != n:
        return [Violation(0, (), math.inf)]
    W, H = m.container.w, m.container.h
    p = m.params
    out: list[Violation] = []
    R = [tuple(float(v) for v in r) for r in s.rects]
    for i, (x, y, w, h) in enumerate(R):
        for v in (x, y, w, h):
            if v < -tol:
                out.append(Violation(0, (i,), -v))
        if w <= 0 or h <= 0:
            out.append(Violation(1, (i,), math.inf))
            continue
        g = math.log(m.areas.areas[i]) - math.log(w) - math.log(h)
        if g > tol:
            out.append(Violation(1, (i,), g))
        for num, val in ((2, x + w - W), (3, y + h - H), (4, x + y - (W + H) * (1 - p.delta[i]))):
            if val > tol:
                out.append(Violation(num, (i,), val))
        z_opts = (s.z[i],) if s.z is not None else (1, 0)
        best = None
        for z in z_opts:
            v12 = max(0.0, h - H * (1 - z) - w)
            v13 = max(0.0, w - W * z - h)
            if best is None or max(v12, v13) < max(best[1], best[2]):
                best = (z, v12, v13)
        if best[1] > tol:
            out.append(Violation(12, (i,), best[1]))
        if best[2] > tol:
            out.append(Violation(13, (i,), best[2]))
    for i, j in itertools.combinations(range(n), 2):
        xi, yi, wi, hi = R[i]
        xj, yj, wj, hj = R[j]
        best = None
        for bx in itertools.product((0, 1), repeat=4):
            viol = _pair_violation(xi, yi, wi, hi, xj, yj, wj, hj, W, H, p.epsilon,
                                   p.eta[i, j], p.eta[j, i], p.theta[i, j], p.theta[j, i], bx)
            worst = max(v for _, v in viol)
            if best is None or worst < best[0]:
                best = (worst, viol)
        for num, v in best[1]:
            if v > tol:
                out.append(Violation(num, (i, j), v))
    return out


def horizontal_flags(rects, tol: float = 1e-9) -> tuple[int, ...]:
    """z consistent with the shapes: 1 when w >= h (up to tol)."""
    return tuple(int(w >= h * (1 - tol)) for _, _, w, h in rects)


def evaluate_objective(m: Model, s: Solution) -> float:
    """Objective value at s in the internal sum(w + h) scale."""
    p = m.params
    z = s.z if s.z is not None else horizontal_flags(s.rects)
    total = math.fsum(wt * ((r[2] + r[3]) - p.beta * zi) for wt, r, zi in zip(m.weights, s.rects, z))
    for i, j in zip(*np.nonzero(p.gamma)):
        total += math.hypot(s.rects[i][0] - s.rects[j][0], s.rects[i][1] - s.rects[j][1])
    return total


def lower_bound(areas: AreaList | Sequence[float]) -> float:
    """sum 2*sqrt(A_i): no rectangle of area A has w + h below 2*sqrt(A)."""
    vals = areas.areas if isinstance(areas, AreaList) else areas
    return math.fsum(2.0 * math.sqrt(a) for a in vals)


def solution_from_layout(m: Model, layout: Layout, status: str = "feasible") -> Solution:
    rects = [layout.cells[i].as_tuple() for i in m.areas.ids]
    rects = [(r[0] - m.container.x, r[1] - m.container.y, r[2], r[3]) for r in rects]
    z = best_z(m, rects)
    s = Solution(rects, z, 0.0, 0.0, -math.inf, status)
    s.objective = evaluate_objective(m, s)
    s.reported_perimeter = 2.0 * math.fsum(r[2] + r[3] for r in rects)
    return s


def best_z(m: Model, rects) -> tuple[int, ...]:
    """Cheapest feasible z for given shapes: horizontal cells take z = 1 when beta > 0."""
    return horizontal_flags(rects)
