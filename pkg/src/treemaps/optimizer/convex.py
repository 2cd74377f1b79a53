"""Primal-dual interior point method for the continuous subproblems.

Problem form (variables v, all rows are convex inequalities g(v) <= 0):

    minimize   c @ v
    subject to G v - h <= 0                                   linear rows
               log A - log v[iw] - log v[ih] <= 0              area rows
               sqrt((v[a]-v[b])**2 + (v[c]-v[d])**2 + TINY**2) - v[t] <= 0
                                                               distance rows
               E v = e                                         equality rows

Every inequality row is relaxed by one elastic variable sigma >= 0 with cost
M, so a strictly interior start always exists; the solution is a solution of the
original problem when sigma ends at zero. Mehrotra predictor-corrector steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TINY = 1e-12  # smoothing of the distance rows; keeps them differentiable at zero distance


@dataclass
class ConvexProgram:
    nv: int
    c: np.ndarray = None
    G: list = field(default_factory=list)
    h: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    areas: list = field(default_factory=list)  # (iw, ih, log A, label)
    dists: list = field(default_factory=list)  # (a, b, c, d, t, label)
    positive: set = field(default_factory=set)  # indices that must stay > 0
    E: list = field(default_factory=list)
    e: list = field(default_factory=list)
    eq_labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.c is None:
            self.c = np.zeros(self.nv)

    def lin(self, coeffs, rhs: float, label=None) -> None:
        row = np.zeros(self.nv)
        for j, a in coeffs:
            row[j] += a
        self.G.append(row)
        self.h.append(float(rhs))
        self.labels.append(label)

    def eq(self, coeffs, rhs: float, label=None) -> None:
        row = np.zeros(self.nv)
        for j, a in coeffs:
            row[j] += a
        self.E.append(row)
        self.e.append(float(rhs))
        self.eq_labels.append(label)

    def area(self, iw: int, ih: int, A: float, label=None) -> None:
        self.areas.append((iw, ih, math.log(A), label))
        self.positive.update((iw, ih))

    def dist(self, a: int, b: int, c: int, d: int, t: int, label=None) -> None:
        self.dists.append((a, b, c, d, t, label))

    def row_labels(self) -> list:
        return list(self.labels) + [a[3] for a in self.areas] + [d[5] for d in self.dists] + ["sigma>=0"]


@dataclass
class IPMResult:
    v: np.ndarray
    sigma: float
    objective: float  # c @ v
    multipliers: np.ndarray
    eq_multipliers: np.ndarray
    residual: float  # KKT residual of the elastic problem
    gap: float  # complementarity gap s @ lam
    converged: bool
    iterations: int


def _eqs(p: ConvexProgram):
    return np.array(p.E, float).reshape(-1, p.nv), np.array(p.e, float)


def kkt_residual(p: ConvexProgram, v: np.ndarray, lam: np.ndarray, nu: np.ndarray | None = None) -> float:
    """KKT residual of the original (non-elastic) problem at (v, lam, nu).

    Max of stationarity, primal infeasibility and complementarity.
    """
    g, J = _rows(p, v)
    E, e = _eqs(p)
    lam_rows = lam[:len(g)]
    nu = np.zeros(len(e)) if nu is None else nu
    stat = p.c + J.T @ lam_rows + E.T @ nu
    return float(max(np.abs(stat).max(initial=0.0), np.maximum(g, 0).max(initial=0.0),
                     np.abs(E @ v - e).max(initial=0.0), np.abs(lam_rows * g).max(initial=0.0)))


def _rows(p: ConvexProgram, v: np.ndarray):
    """Row values and Jacobian (without the elastic column)."""
    G = np.array(p.G).reshape(-1, p.nv)
    g = [G @ v - np.array(p.h, float)]
    J = [G]
    if p.areas:
        iw = np.array([a[0] for a in p.areas])
        ih = np.array([a[1] for a in p.areas])
        la = np.array([a[2] for a in p.areas])
        g.append(la - np.log(v[iw]) - np.log(v[ih]))
        Ja = np.zeros((len(iw), p.nv))
        r = np.arange(len(iw))
        Ja[r, iw] -= 1 / v[iw]
        Ja[r, ih] -= 1 / v[ih]
        J.append(Ja)
    if p.dists:
        Jd = np.zeros((len(p.dists), p.nv))
        vals = []
        for r, (a, b, c, d, t, _) in enumerate(p.dists):
            dx, dy = v[a] - v[b], v[c] - v[d]
            rr = math.sqrt(dx * dx + dy * dy + TINY * TINY)
            vals.append(rr - v[t])
            Jd[r, a] += dx / rr
            Jd[r, b] -= dx / rr
            Jd[r, c] += dy / rr
            Jd[r, d] -= dy / rr
            Jd[r, t] -= 1
        g.append(np.array(vals))
        J.append(Jd)
    return np.concatenate(g), np.vstack(J)


def _hessian(p: ConvexProgram, v: np.ndarray, lam_area: np.ndarray, lam_dist: np.ndarray) -> np.ndarray:
    Hs = np.zeros((p.nv, p.nv))
    for (iw, ih, _, _), l in zip(p.areas, lam_area):
        Hs[iw, iw] += l / v[iw] ** 2
        Hs[ih, ih] += l / v[ih] ** 2
    for (a, b, c, d, _, _), l in zip(p.dists, lam_dist):
        dx, dy = v[a] - v[b], v[c] - v[d]
        rr = math.sqrt(dx * dx + dy * dy + TINY * TINY)
        ex = np.zeros(p.nv)
        ex[a] += 1
        ex[b] -= 1
        ey = np.zeros(p.nv)
        ey[c] += 1
        ey[d] -= 1
        u = dx * ex + dy * ey
        Hs += l * ((np.outer(ex, ex) + np.outer(ey, ey)) / rr - np.outer(u, u) / rr ** 3)
    return Hs


def solve_ipm(p: ConvexProgram, v0: np.ndarray, M: float = 1e3, tol: float = 1e-9,
              maxit: int = 150, phase1: bool = False) -> IPMResult:
    """Elastic primal-dual IPM. With ``phase1`` the objective is sigma alone."""
    nv = p.nv
    n = nv + 1
    c = np.concatenate((np.zeros(nv) if phase1 else p.c, [1.0 if phase1 else M]))
    v = np.array(v0, dtype=float)
    for i in p.positive:
        v[i] = max(v[i], 1e-8)
    g0, _ = _rows(p, v)
    m = len(g0) + 1
    na, nd = len(p.areas), len(p.dists)
    ml = m - 1 - na - nd
    sigma = max(0.0, g0.max(initial=0.0)) + 1e-2
    z = np.concatenate((v, [sigma]))

    def q(z):
        g, _ = _rows(p, z[:nv])
        return np.concatenate((g - z[nv], [-z[nv]]))

    def jac(z):
        _, Jg = _rows(p, z[:nv])
        J = np.zeros((m, n))
        J[:-1, :nv] = Jg
        J[:-1, nv] = -1
        J[-1, nv] = -1
        return J

    E0, e = _eqs(p)
    me = len(e)
    E = np.zeros((me, n))
    E[:, :nv] = E0
    nu = np.zeros(me)
    s = -q(z)
    lam = np.ones(m)
    pos = np.array(sorted(p.positive), dtype=int)
    converged = False
    err = mu = math.inf
    it = 0
    for it in range(maxit):
        if not np.all(np.isfinite(z)):
            break
        J = jac(z)
        rd = c + J.T @ lam + E.T @ nu
        rp = q(z) + s
        re = E @ z - e
        mu = s @ lam / m
        err = max(np.abs(rd).max(), np.abs(rp).max(), np.abs(re).max(initial=0.0))
        if err < tol and mu < tol * 1e-2:
            converged = True
            break
        Hs = np.zeros((n, n))
        Hs[:nv, :nv] = _hessian(p, z[:nv], lam[ml:ml + na], lam[ml + na:ml + na + nd])
        D = lam / s
        K = Hs + J.T @ (D[:, None] * J) + 1e-13 * np.eye(n)
        if me:
            K = np.block([[K, E.T], [E, -1e-13 * np.eye(me)]])

        def direction(rc):
            rhs = np.concatenate((-rd - J.T @ ((-rc + lam * rp) / s), -re))
            try:
                d = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                d = np.linalg.lstsq(K, rhs, rcond=None)[0]
            dz, dn = d[:n], d[n:]
            ds = -rp - J @ dz
            dl = (-rc - lam * ds) / s
            return dz, ds, dl, dn

        def maxstep(x, dx):
            neg = dx < 0
            return min(1.0, float(np.min(-x[neg] / dx[neg]))) if neg.any() else 1.0

        dz, ds, dl, _ = direction(lam * s)
        aa = min(maxstep(s, ds), maxstep(lam, dl))
        mu_aff = (s + aa * ds) @ (lam + aa * dl) / m
        dz, ds, dl, dn = direction(lam * s + ds * dl - (mu_aff / mu) ** 3 * mu)
        a = 0.99 * min(maxstep(s, ds), maxstep(lam, dl))
        for _ in range(60):
            if len(pos) == 0 or (z[pos] + a * dz[pos] > 0).all():
                break
            a *= 0.5
        z = z + a * dz
        s = s + a * ds
        lam = lam + a * dl
        nu = nu + a * dn
    v = z[:nv]
    return IPMResult(v, float(z[nv]), float(p.c @ v), lam, nu, float(err), float(s @ lam),
                     converged, it)
