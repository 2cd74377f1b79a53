"""Batched relaxations for sequence-pair nodes.

A node fixes, for every pair of its k placed cells, one of the four
relations (left-of / below in either order). Children of a node are solved
together: the elastic interior point iteration below runs on a stack of
problems with identical row structure.

Lower bounds come from Lagrangian duality. Dualizing the separation, box
and container rows with flows F (horizontal) and G (vertical) leaves one
separable problem per cell,

    min (c_i + F_i) w + (c_i + G_i) h   s.t.  w h >= A_i  [, orientation]

whose value is 2 sqrt(A_i (c_i+F_i)(c_i+G_i)) without an orientation
constraint. Any non-negative flows conserved through the left-of and below
graphs give a valid bound; they are read off the IPM multipliers, or pushed
along longest paths by a cheap ascent used to screen children.
"""

from __future__ import annotations

import numpy as np


def sequence_children(gp: list, gm: list, c: int):
    """All insertions of cell c into the sequence pair (gp, gm).

    Returns the child pairs and (B, k, k) boolean relation stacks: left[b, i, j]
    when i is left of j, below[b, i, j] when i is below j.
    """
    k = len(gp) + 1
    kids = []
    for p in range(k):
        for q in range(k):
            kids.append((gp[:p] + [c] + gp[p:], gm[:q] + [c] + gm[q:]))
    B = len(kids)
    P = np.zeros((B, k), int)
    Q = np.zeros((B, k), int)
    for b, (a1, a2) in enumerate(kids):
        P[b, a1] = np.arange(k)
        Q[b, a2] = np.arange(k)
    bp = P[:, :, None] < P[:, None, :]
    bq = Q[:, :, None] < Q[:, None, :]
    left = bp & bq
    below = (~bp) & bq & (P[:, :, None] != P[:, None, :])
    return kids, left, below


def cell_min(A, cF, cG, orient=None):
    """Per-cell minimum of cF*w + cG*h over w*h >= A; returns (value, w, h).

    orient: +1 forces w >= h, -1 forces h >= w, 0 or None leaves it free.
    """
    w = np.sqrt(A * cG / cF)
    h = np.sqrt(A * cF / cG)
    if orient is not None:
        sq = np.sqrt(A) * np.ones_like(w)
        flip = ((orient > 0) & (w < h)) | ((orient < 0) & (w > h))
        w = np.where(flip, sq, w)
        h = np.where(flip, sq, h)
    return cF * w + cG * h, w, h


def dual_value(A, cw, F, FT, G, GT, W, H, orient=None):
    return np.sum(cell_min(A, cw + F, cw + G, orient)[0], -1) - W * FT - H * GT


def longest_path(R, wts):
    """Longest weighted path in each DAG of the stack; returns (length, node mask)."""
    B, k, _ = R.shape
    d = wts.copy()
    pred = np.full((B, k), -1)
    for _ in range(k):
        cand = np.where(R, d[:, :, None], -np.inf)
        arg = cand.argmax(1)
        best = np.take_along_axis(cand, arg[:, None, :], 1)[:, 0] + wts
        upd = best > d * (1 + 1e-15) + 1e-300
        if not upd.any():
            break
        d = np.where(upd, best, d)
        pred = np.where(upd, arg, pred)
    end = d.argmax(1)
    val = d[np.arange(B), end]
    mask = np.zeros((B, k), bool)
    cur = end
    alive = np.ones(B, bool)
    rb = np.arange(B)
    for _ in range(k):
        mask[rb[alive], cur[alive]] = True
        nxt = pred[rb, cur]
        alive &= nxt >= 0
        cur = np.where(alive, nxt, cur)
        if not alive.any():
            break
    return val, mask


def ascent(A, cw, W, H, left, below, F, FT, G, GT, rounds=10, stop=np.inf, extra=0.0, orient=None):
    """Push flow along the longest path that overflows the container.

    Every state is a valid bound; children whose bound plus ``extra`` (scalar
    or per child) reaches ``stop`` are frozen early. Returns the updated flows and bounds.
    """
    B = len(F)
    act = np.arange(B)
    extra = np.broadcast_to(np.asarray(extra, float), (B,))
    bound = dual_value(A, cw, F, FT, G, GT, W, H, orient)
    for _ in range(rounds):
        act = act[bound[act] + extra[act] < stop]
        if len(act) == 0:
            break
        f, g, gt_, ft_ = F[act], G[act], GT[act], FT[act]
        ori = None if orient is None else orient[act]
        _, w, h = cell_min(A, cw + f, cw + g, ori)
        vh, mh = longest_path(left[act], w)
        vv, mv = longest_path(below[act], h)
        gh, gv = vh - W, vv - H
        doh = gh >= gv
        pos = np.where(doh, gh, gv) > 1e-12
        if not pos.any():
            break
        act = act[pos]
        f, g, gt_, ft_, doh = f[pos], g[pos], gt_[pos], ft_[pos], doh[pos]
        ori = None if ori is None else ori[pos]
        mask = np.where(doh[:, None], mh[pos], mv[pos])
        own = np.where(doh[:, None], f, g)
        oth = np.where(doh[:, None], g, f)
        cap = np.where(doh, W, H)
        if ori is None:
            # maximize along the path: sum of sqrt(A (c+oth)) / sqrt(c+own+t) = cap
            a = np.where(mask, np.sqrt(A * (cw + oth)), 0.0)
            b = cw + own
            t = np.zeros(len(act))
            for _ in range(8):
                r = np.sqrt(b + t[:, None])
                fv = (a / r).sum(1) - cap
                fd = -0.5 * (a / r ** 3).sum(1)
                t = t - fv / fd
            t = np.maximum(t, 0)
        else:
            t = _bisect_step(A, cw, own, oth, mask, cap, doh, ori)
        add = mask * t[:, None]
        nF = np.where(doh[:, None], f + add, f)
        nFT = np.where(doh, ft_ + t, ft_)
        nG = np.where(doh[:, None], g, g + add)
        nGT = np.where(doh, gt_, gt_ + t)
        nb = dual_value(A, cw, nF, nFT, nG, nGT, W, H, ori)
        ok = nb > bound[act]
        ai = act[ok]
        F[ai], FT[ai], G[ai], GT[ai] = nF[ok], nFT[ok], nG[ok], nGT[ok]
        bound[ai] = nb[ok]
        act = np.union1d(ai, np.setdiff1d(np.arange(B), act))
    return F, FT, G, GT, bound


def _bisect_step(A, cw, own, oth, mask, cap, doh, ori, iters=40):
    """Step length where the path's optimal extent equals the container side."""
    def extent(t):
        cF = np.where(doh[:, None], cw + own + t[:, None], cw + oth)
        cG = np.where(doh[:, None], cw + oth, cw + own + t[:, None])
        _, w, h = cell_min(A, cF, cG, ori)
        return np.where(mask, np.where(doh[:, None], w, h), 0.0).sum(1)
    lo = np.zeros(len(cap))
    hi = np.ones(len(cap))
    for _ in range(60):
        over = extent(hi) > cap
        if not over.any():
            break
        hi = np.where(over, hi * 4, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        over = extent(mid) > cap
        lo = np.where(over, mid, lo)
        hi = np.where(over, hi, mid)
    return lo


def solve_batch(A, cw, W, H, left, below, v_parent, rest, inc, orient=None, zconst=None,
                M=1e3, tol=1e-9, maxit=120, leaf=False):
    """Elastic IPM on a stack of relaxations with shared structure.

    Returns (status, lb, obj, V, flows). Status per problem: 1 pruned (lb
    reached ``inc``), 2 converged, 3 stopped early because the iterate is
    feasible and clearly better than ``inc`` (internal nodes only) or the
    iteration cap was hit. ``rest`` is added to every bound and objective;
    ``zconst`` (B,) too.
    """
    B, k, _ = left.shape
    A = np.asarray(A[:k], dtype=float)
    cw = np.asarray(cw[:k], dtype=float)
    sq = np.sqrt(A)
    nv = 4 * k
    n = nv + 1
    iw = np.arange(k)
    ih = k + iw
    ix = 2 * k + iw
    iy = 3 * k + iw
    I, Jx = np.nonzero(np.triu(np.ones((k, k), bool), 1))
    npair = len(I)
    nori = k if orient is not None else 0
    ml = 4 * k + npair + nori
    na = k
    m = ml + na + 1
    G = np.zeros((B, ml, nv))
    hv = np.zeros((B, ml))
    r = np.arange(k)
    G[:, r, ix] = -1
    G[:, k + r, iy] = -1
    G[:, 2 * k + r, ix] = 1
    G[:, 2 * k + r, iw] = 1
    hv[:, 2 * k + r] = W
    G[:, 3 * k + r, iy] = 1
    G[:, 3 * k + r, ih] = 1
    hv[:, 3 * k + r] = H
    # one relation row per pair: 0 I left J, 1 J left I, 2 I below J, 3 J below I
    code = np.where(left[:, I, Jx], 0, np.where(left[:, Jx, I], 1, np.where(below[:, I, Jx], 2, 3)))
    src = np.where((code == 0) | (code == 2), I, Jx)
    dst = np.where((code == 0) | (code == 2), Jx, I)
    horiz = code < 2
    rows = 4 * k + np.arange(npair)
    bb = np.arange(B)[:, None]
    G[bb, rows, np.where(horiz, 2 * k + src, 3 * k + src)] = 1
    G[bb, rows, np.where(horiz, src, k + src)] = 1
    G[bb, rows, np.where(horiz, 2 * k + dst, 3 * k + dst)] = -1
    if orient is not None:
        # orient * (h - w) <= 0
        ro = 4 * k + npair + r
        G[:, ro, ih] = orient
        G[:, ro, iw] = -orient
    zc = np.zeros(B) if zconst is None else np.asarray(zconst, float)
    c = np.zeros(n)
    c[:k] = cw
    c[k:2 * k] = cw
    c[nv] = M
    la = np.log(A)
    w0 = np.empty((B, k))
    h0 = np.empty((B, k))
    if v_parent is None:
        w0[:] = sq
        h0[:] = sq
    else:
        w0[:, :k - 1] = v_parent[:k - 1]
        h0[:, :k - 1] = v_parent[k - 1:2 * k - 2]
        w0[:, k - 1] = sq[k - 1]
        h0[:, k - 1] = sq[k - 1]
    Lf = left.astype(float)
    Bf = below.astype(float)

    def longest(R, s):
        x = np.zeros((B, k))
        for _ in range(k):
            x = np.max(R * (x + s)[:, :, None], axis=1)
        return x

    x0 = longest(Lf, w0)
    y0 = longest(Bf, h0)
    spanx = np.max(x0 + w0, 1)
    spany = np.max(y0 + h0, 1)
    fx = 0.98 * W / np.maximum(spanx, W)
    fy = 0.98 * H / np.maximum(spany, H)
    w0 *= fx[:, None]
    x0 = x0 * fx[:, None] + 0.005 * W / k
    h0 *= fy[:, None]
    y0 = y0 * fy[:, None] + 0.005 * H / k
    v = np.concatenate((w0, h0, x0, y0), 1)

    def qf(v, s, act):
        out = np.empty((v.shape[0], m))
        out[:, :ml] = (G[act] @ v[..., None])[..., 0] - hv[act] - s[:, None]
        out[:, ml:ml + na] = la - np.log(v[:, iw]) - np.log(v[:, ih]) - s[:, None]
        out[:, -1] = -s
        return out

    allb = np.arange(B)
    s0 = np.maximum(0, qf(v, np.zeros(B), allb)[:, :-1].max(1)) + 1e-2
    z = np.concatenate((v, s0[:, None]), 1)
    sl = -qf(v, s0, allb)
    lam = np.ones((B, m))
    J = np.zeros((B, m, n))
    J[:, :ml, :nv] = G
    J[:, :ml, nv] = -1
    J[:, ml:ml + na, nv] = -1
    J[:, -1, nv] = -1
    FS = np.zeros((B, k))
    FTS = np.zeros(B)
    GS = np.zeros((B, k))
    GTS = np.zeros(B)
    lb = np.full(B, -np.inf)
    obj = np.full(B, np.inf)
    status = np.zeros(B, int)
    ar = np.arange(na)
    ori_all = orient
    for _ in range(maxit):
        act = np.nonzero(status == 0)[0]
        if len(act) == 0:
            break
        zz = z[act]
        L = lam[act]
        S = sl[act]
        vv = zz[:, :nv]
        ss = zz[:, nv]
        Jb = J[act].copy()
        Jb[:, ml + ar, iw] = -1 / vv[:, iw]
        Jb[:, ml + ar, ih] = -1 / vv[:, ih]
        qq = qf(vv, ss, act)
        rd = c + (L[:, None, :] @ Jb)[:, 0]
        rp = qq + S
        mu = (S * L).sum(1) / m
        # flows from the multipliers, repaired to conserve at every cell
        lx0 = L[:, :k]
        ly0 = L[:, k:2 * k]
        lxW = L[:, 2 * k:3 * k].copy()
        lyH = L[:, 3 * k:4 * k].copy()
        lr = L[:, 4 * k:4 * k + npair]
        hz = horiz[act]
        s_ = src[act]
        d_ = dst[act]
        outx = lxW.copy()
        inx = lx0.copy()
        outy = lyH.copy()
        iny = ly0.copy()
        bi = np.broadcast_to(np.arange(len(act))[:, None], s_.shape)
        np.add.at(outx, (bi, s_), lr * hz)
        np.add.at(inx, (bi, d_), lr * hz)
        np.add.at(outy, (bi, s_), lr * ~hz)
        np.add.at(iny, (bi, d_), lr * ~hz)
        ex = np.maximum(inx - outx, 0)
        lxW += ex
        outx += ex
        ey = np.maximum(iny - outy, 0)
        lyH += ey
        outy += ey
        ori = None if ori_all is None else ori_all[act]
        D = dual_value(A, cw, outx, lxW.sum(1), outy, lyH.sum(1), W, H, ori) + rest + zc[act]
        imp = D > lb[act]
        ai = act[imp]
        FS[ai] = outx[imp]
        FTS[ai] = lxW.sum(1)[imp]
        GS[ai] = outy[imp]
        GTS[ai] = lyH.sum(1)[imp]
        lb[act] = np.maximum(lb[act], D)
        err = np.maximum(np.abs(rd).max(1), np.abs(rp).max(1))
        pobj = vv @ c[:nv] + M * ss + rest + zc[act]
        pruned = lb[act] >= inc
        conv = (err < tol) & (mu < tol * 1e-2)
        st = np.zeros(len(act), int)
        st[conv] = 2
        if not leaf:
            st[(ss < 1e-9) & (np.abs(rp).max(1) < 1e-9) & (pobj < inc - 1e-6 * abs(inc)) & (mu < 1e-4)] = 3
        st[pruned] = 1
        status[act] = st
        obj[act] = np.where(st == 2, pobj, obj[act])
        keep = st == 0
        if not keep.any():
            break
        act = act[keep]
        zz, L, S, vv, ss, Jb, rd, rp, mu = zz[keep], L[keep], S[keep], vv[keep], ss[keep], Jb[keep], rd[keep], rp[keep], mu[keep]
        Hs = np.zeros((len(act), n, n))
        la_a = L[:, ml:ml + na]
        Hs[:, iw, iw] += la_a / vv[:, iw] ** 2
        Hs[:, ih, ih] += la_a / vv[:, ih] ** 2
        K = Hs + Jb.transpose(0, 2, 1) @ (Jb * (L / S)[..., None]) + 1e-13 * np.eye(n)

        def direction(rc):
            rhs = -rd - (((-rc + L * rp) / S)[:, None, :] @ Jb)[:, 0]
            try:
                dz = np.linalg.solve(K, rhs[..., None])[..., 0]
            except np.linalg.LinAlgError:
                dz = np.stack([np.linalg.lstsq(K[i], rhs[i], rcond=None)[0] for i in range(len(K))])
            ds = -rp - (Jb @ dz[..., None])[..., 0]
            dl = (-rc - L * ds) / S
            return dz, ds, dl

        def maxstep(x, dx):
            r_ = np.where(dx < 0, -x / np.where(dx < 0, dx, -1), np.inf)
            return np.minimum(1.0, r_.min(1))

        dz, ds, dl = direction(L * S)
        aa = np.minimum(maxstep(S, ds), maxstep(L, dl))
        mu_aff = ((S + aa[:, None] * ds) * (L + aa[:, None] * dl)).sum(1) / m
        sg = (mu_aff / mu) ** 3
        dz, ds, dl = direction(L * S + ds * dl - (sg * mu)[:, None])
        a = 0.99 * np.minimum(maxstep(S, ds), maxstep(L, dl))
        dv = dz[:, :nv]
        for _ in range(60):
            vn = vv + a[:, None] * dv
            bad = ~((vn[:, iw] > 0).all(1) & (vn[:, ih] > 0).all(1))
            if not bad.any():
                break
            a = np.where(bad, a * 0.5, a)
        z[act] = zz + a[:, None] * dz
        sl[act] = S + a[:, None] * ds
        lam[act] = L + a[:, None] * dl
    status[status == 0] = 3
    return status, lb, obj, z[:, :nv], (FS, FTS, GS, GTS)
