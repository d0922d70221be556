"""Hot loops of the geometry layer.

Everything here is written against plain numpy arrays so the same source runs
compiled (numba) or interpreted (``SPHEREPOLY_DISABLE_JIT=1``).  Facets are
stored as rows of index/normal/offset arrays; ``nbr[f, i]`` is the facet
across the ridge that omits ``verts[f, i]``.
"""

import numpy as np

from .._jit import njit

HULL_OK = 0
HULL_DEGENERATE = 1
HULL_TOPOLOGY = 2
HULL_TIE = 3
TIE_UNRESOLVED = 99

_HASH_MOD = 2147483647


@njit(inline="always")
def _dot(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        s += a[i] * b[i]
    return s


@njit(inline="always")
def _orient_out(P, verts, f, c, norms, nx, ny, nz, n):
    h = 0.0
    hc = 0.0
    for i in range(n):
        v = verts[f, i]
        h += nx * P[v, 0] + ny * P[v, 1] + (nz * P[v, 2] if n == 3 else 0.0)
    h /= n
    hc = nx * c[0] + ny * c[1] + (nz * c[2] if n == 3 else 0.0)
    if hc - h > 0.0:
        nx, ny, nz, h = -nx, -ny, -nz, -h
    norms[f, 0] = nx
    norms[f, 1] = ny
    if n == 3:
        norms[f, 2] = nz
    return h


@njit
def _plane2(P, verts, f, c, norms):
    a = verts[f, 0]
    b = verts[f, 1]
    ex = P[b, 0] - P[a, 0]
    ey = P[b, 1] - P[a, 1]
    ln = np.sqrt(ex * ex + ey * ey)
    if ln == 0.0:
        return 0.0, np.inf
    h = _orient_out(P, verts, f, c, norms, -ey / ln, ex / ln, 0.0, 2)
    return h, 1.0


@njit
def _plane3(P, verts, f, c, norms):
    a = verts[f, 0]
    b = verts[f, 1]
    d = verts[f, 2]
    ux = P[b, 0] - P[a, 0]
    uy = P[b, 1] - P[a, 1]
    uz = P[b, 2] - P[a, 2]
    vx = P[d, 0] - P[a, 0]
    vy = P[d, 1] - P[a, 1]
    vz = P[d, 2] - P[a, 2]
    nx = uy * vz - uz * vy
    ny = uz * vx - ux * vz
    nz = ux * vy - uy * vx
    ln = np.sqrt(nx * nx + ny * ny + nz * nz)
    if ln == 0.0:
        return 0.0, np.inf
    lu = ux * ux + uy * uy + uz * uz
    lv = vx * vx + vy * vy + vz * vz
    wx = vx - ux
    wy = vy - uy
    wz = vz - uz
    lw = wx * wx + wy * wy + wz * wz
    emax = np.sqrt(max(lu, max(lv, lw)))
    # smallest height of the triangle = 2 * area / longest edge
    cond = emax * emax / ln
    h = _orient_out(P, verts, f, c, norms, nx / ln, ny / ln, nz / ln, 3)
    return h, cond


@njit
def _plane(P, verts, f, c, norms, Q, w):
    """Write the outward unit normal of facet f (pointing away from c) into
    ``norms[f]``.  ``Q`` (n, n) and ``w`` (n,) are scratch.

    Returns (offset, condition estimate); the condition estimate is inf for a
    degenerate simplex.
    """
    n = P.shape[1]
    if n == 2:
        return _plane2(P, verts, f, c, norms)
    if n == 3:
        return _plane3(P, verts, f, c, norms)
    v0 = verts[f, 0]
    emax = 0.0
    rmin = np.inf
    for i in range(1, n):
        vi = verts[f, i]
        en = 0.0
        for t in range(n):
            w[t] = P[vi, t] - P[v0, t]
            en += w[t] * w[t]
        if en > emax:
            emax = en
        for _rep in range(2):
            for j in range(i - 1):
                a = 0.0
                for t in range(n):
                    a += Q[j, t] * w[t]
                for t in range(n):
                    w[t] -= a * Q[j, t]
        wn = 0.0
        for t in range(n):
            wn += w[t] * w[t]
        wn = np.sqrt(wn)
        if wn < rmin:
            rmin = wn
        if wn == 0.0:
            return 0.0, np.inf
        for t in range(n):
            Q[i - 1, t] = w[t] / wn
    # complete the basis with the coordinate axis least inside the edge span
    bestn = -1.0
    for k in range(n):
        for t in range(n):
            w[t] = 0.0
        w[k] = 1.0
        for j in range(n - 1):
            a = 0.0
            for t in range(n):
                a += Q[j, t] * w[t]
            for t in range(n):
                w[t] -= a * Q[j, t]
        wn = 0.0
        for t in range(n):
            wn += w[t] * w[t]
        if wn > bestn:
            bestn = wn
            for t in range(n):
                norms[f, t] = w[t]
    for j in range(n - 1):
        a = 0.0
        for t in range(n):
            a += Q[j, t] * norms[f, t]
        for t in range(n):
            norms[f, t] -= a * Q[j, t]
    un = 0.0
    for t in range(n):
        un += norms[f, t] * norms[f, t]
    un = np.sqrt(un)
    h = 0.0
    hc = 0.0
    for t in range(n):
        norms[f, t] /= un
        hc += norms[f, t] * c[t]
        for i in range(n):
            h += norms[f, t] * P[verts[f, i], t]
    h /= n
    if hc - h > 0.0:
        for t in range(n):
            norms[f, t] = -norms[f, t]
        h = -h
    cond = np.sqrt(emax) / rmin
    return h, cond


@njit
def _lookup_tie(verts, f, q, tie_keys, tie_signs, key):
    n = verts.shape[1]
    for t in range(n):
        key[t] = verts[f, t]
    for m in range(1, n):
        kv = key[m]
        mm = m - 1
        while mm >= 0 and key[mm] > kv:
            key[mm + 1] = key[mm]
            mm -= 1
        key[mm + 1] = kv
    key[n] = q
    for r in range(tie_keys.shape[0]):
        same = True
        for t in range(n + 1):
            if tie_keys[r, t] != key[t]:
                same = False
                break
        if same:
            return tie_signs[r]
    return TIE_UNRESOLVED


@njit(inline="always")
def _side(P, verts, norms, offs, ftols, f, q, tie_keys, tie_signs, key):
    """+1 beyond, -1 beneath, 0 on the hyperplane of facet f.

    Near ties are answered from the exact-sign cache; TIE_UNRESOLVED (with the
    query stored in ``key``) asks the caller to resolve it and rerun.
    """
    n = P.shape[1]
    d = -offs[f]
    for t in range(n):
        d += norms[f, t] * P[q, t]
    tol = ftols[f]
    if d > tol:
        return 1
    if d < -tol:
        return -1
    return _lookup_tie(verts, f, q, tie_keys, tie_signs, key)


@njit
def _initial_simplex(P, dtol):
    """Greedy n+1 points of large spanning volume; False if all points lie
    within ``dtol`` of a lower-dimensional affine subspace."""
    N, n = P.shape
    chosen = np.zeros(n + 1, dtype=np.int64)
    resid = np.empty((N, n))
    for j in range(N):
        for t in range(n):
            resid[j, t] = P[j, t] - P[0, t]
    q = np.empty(n)
    for k in range(1, n + 1):
        best = -1
        bestn = -1.0
        for j in range(N):
            r = 0.0
            for t in range(n):
                r += resid[j, t] * resid[j, t]
            if r > bestn:
                bestn = r
                best = j
        bestn = np.sqrt(bestn)
        if bestn < dtol:
            return chosen, False
        chosen[k] = best
        if k == n:
            break
        for t in range(n):
            q[t] = resid[best, t] / bestn
        for j in range(N):
            a = 0.0
            for t in range(n):
                a += q[t] * resid[j, t]
            for t in range(n):
                resid[j, t] -= a * q[t]
    return chosen, True


@njit
def _grow_int(a, cap, fill):
    out = np.full((cap,) + a.shape[1:], fill, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit
def _grow_float(a, cap):
    out = np.zeros((cap,) + a.shape[1:])
    out[: a.shape[0]] = a
    return out


@njit(inline="always")
def _same_key(keys, ex, ey):
    for m in range(keys.shape[1]):
        if keys[ex, m] != keys[ey, m]:
            return False
    return True


@njit(inline="always")
def _link(nbrs, matched, ef, es, ex, ey):
    matched[ex] = True
    matched[ey] = True
    nbrs[ef[ex], es[ex]] = ef[ey]
    nbrs[ef[ey], es[ey]] = ef[ex]


@njit
def hull_kernel(P, tol, tie_keys, tie_signs):
    """Beneath-beyond convex hull with conflict lists.

    ``tie_keys``/``tie_signs`` hold exact signs of previously unresolved near
    ties (rows: sorted facet vertex ids then query index).  Returns
    (status, verts, normals, offsets, nbrs, interior_point, tie_key); on
    HULL_TIE the caller resolves ``tie_key`` exactly and calls again.
    """
    N, n = P.shape
    key = np.full(n + 1, -1, dtype=np.int64)
    chosen, ok = _initial_simplex(P, tol * 10.0)
    c = np.zeros(n)
    empty_i = np.zeros((0, n), dtype=np.int64)
    empty_f = np.zeros((0, n))
    if not ok:
        return HULL_DEGENERATE, empty_i, empty_f, np.zeros(0), empty_i, c, key
    for k in range(n + 1):
        c += P[chosen[k]]
    c /= n + 1

    Qw = np.zeros((n, n))
    ww = np.zeros(n)
    cap = 8 * (n + 1)
    verts = np.full((cap, n), -1, dtype=np.int64)
    nbrs = np.full((cap, n), -1, dtype=np.int64)
    norms = np.zeros((cap, n))
    offs = np.zeros(cap)
    ftols = np.zeros(cap)
    alive = np.zeros(cap, dtype=np.bool_)
    head = np.full(cap, -1, dtype=np.int64)
    vis_stamp = np.full(cap, -1, dtype=np.int64)
    inv_stamp = np.full(cap, -1, dtype=np.int64)
    free = np.empty(cap, dtype=np.int64)
    nfree = 0
    nfac = 0

    conflict = np.full(N, -1, dtype=np.int64)
    nxt = np.full(N, -1, dtype=np.int64)
    done = np.zeros(N, dtype=np.bool_)

    # initial simplex: facet j omits simplex vertex j
    for j in range(n + 1):
        s = 0
        for k in range(n + 1):
            if k != j:
                verts[j, s] = chosen[k]
                nbrs[j, s] = k
                s += 1
        h, cond = _plane(P, verts, j, c, norms, Qw, ww)
        if not np.isfinite(cond):
            return HULL_DEGENERATE, empty_i, empty_f, np.zeros(0), empty_i, c, key
        offs[j] = h
        ftols[j] = tol + 1e-13 * cond
        alive[j] = True
    nfac = n + 1
    for k in range(n + 1):
        done[chosen[k]] = True

    for q in range(N):
        if done[q]:
            continue
        for f in range(n + 1):
            sd = _side(P, verts, norms, offs, ftols, f, q, tie_keys, tie_signs, key)
            if sd == TIE_UNRESOLVED:
                return HULL_TIE, empty_i, empty_f, np.zeros(0), empty_i, c, key
            if sd > 0:
                conflict[q] = f
                nxt[q] = head[f]
                head[f] = q
                break

    vis = np.empty(64, dtype=np.int64)
    newf = np.empty(64, dtype=np.int64)
    newslot = np.empty(64, dtype=np.int64)
    ecap = 64 * max(n - 1, 1)
    keys = np.empty((ecap, max(n - 1, 1)), dtype=np.int64)
    hashes = np.empty(ecap, dtype=np.int64)
    ef = np.empty(ecap, dtype=np.int64)
    es = np.empty(ecap, dtype=np.int64)
    matched = np.empty(ecap, dtype=np.bool_)
    stamp = 0
    for p in range(N):
        if done[p]:
            continue
        done[p] = True
        f0 = conflict[p]
        if f0 < 0:
            continue
        stamp += 1
        nvis = 1
        vis[0] = f0
        vis_stamp[f0] = stamp
        i = 0
        while i < nvis:
            f = vis[i]
            i += 1
            for k in range(n):
                g = nbrs[f, k]
                if vis_stamp[g] == stamp or inv_stamp[g] == stamp:
                    continue
                sd = _side(P, verts, norms, offs, ftols, g, p, tie_keys, tie_signs, key)
                if sd == TIE_UNRESOLVED:
                    return HULL_TIE, empty_i, empty_f, np.zeros(0), empty_i, c, key
                if sd > 0:
                    vis_stamp[g] = stamp
                    if nvis == vis.shape[0]:
                        vis = _grow_int(vis, 2 * nvis, -1)
                    vis[nvis] = g
                    nvis += 1
                else:
                    inv_stamp[g] = stamp

        # cone over the horizon
        nnew = 0
        for ii in range(nvis):
            f = vis[ii]
            for k in range(n):
                g = nbrs[f, k]
                if vis_stamp[g] == stamp:
                    continue
                if nfree > 0:
                    nfree -= 1
                    nf = free[nfree]
                else:
                    if nfac == verts.shape[0]:
                        cap = 2 * nfac
                        verts = _grow_int(verts, cap, -1)
                        nbrs = _grow_int(nbrs, cap, -1)
                        norms = _grow_float(norms, cap)
                        offs = _grow_float(offs, cap)
                        ftols = _grow_float(ftols, cap)
                        alive = _grow_int(alive, cap, False)
                        head = _grow_int(head, cap, -1)
                        vis_stamp = _grow_int(vis_stamp, cap, -1)
                        inv_stamp = _grow_int(inv_stamp, cap, -1)
                        free = _grow_int(free, cap, -1)
                    nf = nfac
                    nfac += 1
                for t in range(n):
                    verts[nf, t] = verts[f, t]
                    nbrs[nf, t] = -1
                verts[nf, k] = p
                nbrs[nf, k] = g
                for kk in range(n):
                    if nbrs[g, kk] == f:
                        nbrs[g, kk] = nf
                        break
                h, cond = _plane(P, verts, nf, c, norms, Qw, ww)
                if not np.isfinite(cond):
                    return HULL_TOPOLOGY, empty_i, empty_f, np.zeros(0), empty_i, c, key
                offs[nf] = h
                ftols[nf] = tol + 1e-13 * cond
                alive[nf] = True
                head[nf] = -1
                vis_stamp[nf] = -1
                inv_stamp[nf] = -1
                if nnew == newf.shape[0]:
                    newf = _grow_int(newf, 2 * nnew, -1)
                    newslot = _grow_int(newslot, 2 * nnew, -1)
                newf[nnew] = nf
                newslot[nnew] = k
                nnew += 1

        # glue the new facets to each other along ridges through p
        ne = nnew * (n - 1)
        if ne > ecap:
            ecap = 2 * ne
            keys = np.empty((ecap, max(n - 1, 1)), dtype=np.int64)
            hashes = np.empty(ecap, dtype=np.int64)
            ef = np.empty(ecap, dtype=np.int64)
            es = np.empty(ecap, dtype=np.int64)
            matched = np.empty(ecap, dtype=np.bool_)
        e = 0
        for t in range(nnew):
            nf = newf[t]
            for k in range(n):
                if k == newslot[t]:
                    continue
                m = 0
                for kk in range(n):
                    if kk != k:
                        keys[e, m] = verts[nf, kk]
                        m += 1
                for m in range(1, n - 1):
                    kv = keys[e, m]
                    mm = m - 1
                    while mm >= 0 and keys[e, mm] > kv:
                        keys[e, mm + 1] = keys[e, mm]
                        mm -= 1
                    keys[e, mm + 1] = kv
                hv = 0
                for m in range(n - 1):
                    hv = (hv * 1000003 + keys[e, m] + 1) % _HASH_MOD
                hashes[e] = hv
                ef[e] = nf
                es[e] = k
                e += 1
        matched[:ne] = False
        if ne <= 64:
            for ex in range(ne):
                if matched[ex]:
                    continue
                for ey in range(ex + 1, ne):
                    if matched[ey] or hashes[ey] != hashes[ex]:
                        continue
                    if _same_key(keys, ex, ey):
                        _link(nbrs, matched, ef, es, ex, ey)
                        break
                if not matched[ex]:
                    return HULL_TOPOLOGY, empty_i, empty_f, np.zeros(0), empty_i, c, key
        else:
            order = np.argsort(hashes[:ne], kind="mergesort")
            a = 0
            while a < ne:
                b = a
                while b < ne and hashes[order[b]] == hashes[order[a]]:
                    b += 1
                for x in range(a, b):
                    ex = order[x]
                    if matched[ex]:
                        continue
                    for y in range(x + 1, b):
                        ey = order[y]
                        if not matched[ey] and _same_key(keys, ex, ey):
                            _link(nbrs, matched, ef, es, ex, ey)
                            break
                    if not matched[ex]:
                        return HULL_TOPOLOGY, empty_i, empty_f, np.zeros(0), empty_i, c, key
                a = b

        # hand the outside points of dead facets to the new cone
        for ii in range(nvis):
            f = vis[ii]
            q = head[f]
            while q != -1:
                qn = nxt[q]
                if q != p and not done[q]:
                    conflict[q] = -1
                    for t in range(nnew):
                        nf = newf[t]
                        sd = _side(P, verts, norms, offs, ftols, nf, q, tie_keys, tie_signs, key)
                        if sd == TIE_UNRESOLVED:
                            return HULL_TIE, empty_i, empty_f, np.zeros(0), empty_i, c, key
                        if sd > 0:
                            conflict[q] = nf
                            nxt[q] = head[nf]
                            head[nf] = q
                            break
                q = qn
            head[f] = -1
            alive[f] = False
            free[nfree] = f
            nfree += 1

    # compact
    nalive = 0
    for f in range(nfac):
        if alive[f]:
            nalive += 1
    remap = np.full(nfac, -1, dtype=np.int64)
    out_v = np.empty((nalive, n), dtype=np.int64)
    out_u = np.empty((nalive, n))
    out_h = np.empty(nalive)
    j = 0
    for f in range(nfac):
        if alive[f]:
            remap[f] = j
            out_v[j] = verts[f]
            out_u[j] = norms[f]
            out_h[j] = offs[f]
            j += 1
    out_n = np.empty((nalive, n), dtype=np.int64)
    j = 0
    for f in range(nfac):
        if alive[f]:
            for k in range(n):
                out_n[j, k] = remap[nbrs[f, k]]
            j += 1
    return HULL_OK, out_v, out_u, out_h, out_n, c, key


@njit
def _chol_solve(G, rhs, k):
    """Solve G[:k,:k] y = rhs[:k] for SPD G; returns (y, ok, logdet)."""
    L = np.zeros((k, k))
    logdet = 0.0
    for i in range(k):
        for j in range(i + 1):
            s = G[i, j]
            for m in range(j):
                s -= L[i, m] * L[j, m]
            if i == j:
                if s <= 0.0:
                    return np.zeros(k), False, -np.inf
                L[i, i] = np.sqrt(s)
                logdet += 2.0 * np.log(L[i, i])
            else:
                L[i, j] = s / L[j, j]
    y = np.empty(k)
    for i in range(k):
        s = rhs[i]
        for m in range(i):
            s -= L[i, m] * y[m]
        y[i] = s / L[i, i]
    for i in range(k - 1, -1, -1):
        s = y[i]
        for m in range(i + 1, k):
            s -= L[m, i] * y[m]
        y[i] = s / L[i, i]
    return y, True, logdet


@njit
def _project_subset(V, idx, k, bary_tol):
    """Min-norm point of aff(V[idx[:k]]); returns (norm, feasible)."""
    n = V.shape[1]
    v0 = V[idx[0]]
    if k == 1:
        return np.sqrt(_dot(v0, v0)), True
    E = np.empty((k - 1, n))
    for i in range(1, k):
        E[i - 1] = V[idx[i]] - v0
    G = np.empty((k - 1, k - 1))
    rhs = np.empty(k - 1)
    for i in range(k - 1):
        rhs[i] = -_dot(E[i], v0)
        for j in range(k - 1):
            G[i, j] = _dot(E[i], E[j])
    y, ok, _ = _chol_solve(G, rhs, k - 1)
    if not ok:
        return np.inf, False
    lam0 = 1.0
    for i in range(k - 1):
        if y[i] < -bary_tol:
            return np.inf, False
        lam0 -= y[i]
    if lam0 < -bary_tol:
        return np.inf, False
    x = v0.copy()
    for i in range(k - 1):
        x += y[i] * E[i]
    return np.sqrt(_dot(x, x)), True


@njit
def simplex_min_norm(V, bary_tol):
    """Exact minimum of ||x|| over the simplex conv(V) by face enumeration."""
    m = V.shape[0]
    idx = np.arange(m)
    d, ok = _project_subset(V, idx, m, bary_tol)
    if ok:
        return d
    best = np.inf
    sub = np.empty(m, dtype=np.int64)
    for mask in range(1, (1 << m) - 1):
        k = 0
        for i in range(m):
            if (mask >> i) & 1:
                sub[k] = i
                k += 1
        d, ok = _project_subset(V, sub, k, bary_tol)
        if ok and d < best:
            best = d
    return best


@njit
def facet_min_dists(P, F):
    out = np.empty(F.shape[0])
    for f in range(F.shape[0]):
        out[f] = simplex_min_norm(P[F[f]], 1e-12)
    return out


@njit
def facet_volumes(P, F):
    """(n-1)-volume of each facet via the Gram determinant; -1 if degenerate."""
    nf, n = F.shape
    out = np.empty(nf)
    lfact = 0.0
    for i in range(2, n):
        lfact += np.log(i)
    G = np.empty((n - 1, n - 1))
    E = np.empty((n - 1, n))
    rhs = np.zeros(n - 1)
    for f in range(nf):
        v0 = P[F[f, 0]]
        for i in range(1, n):
            E[i - 1] = P[F[f, i]] - v0
        for i in range(n - 1):
            for j in range(i + 1):
                g = _dot(E[i], E[j])
                G[i, j] = g
                G[j, i] = g
        _, ok, logdet = _chol_solve(G, rhs, n - 1)
        if ok:
            out[f] = np.exp(0.5 * logdet - lfact)
        else:
            out[f] = -1.0
    return out
