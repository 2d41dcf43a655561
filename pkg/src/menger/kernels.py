"""Hot inner loops over flat operation tables.

Every kernel exists twice: a numba-compiled loop (``*_nb``) and a
vectorized numpy version (``*_np``).  The public wrappers dispatch on
``backend`` ("numba" or "numpy"), defaulting to :data:`menger._accel.USE_NUMBA`.  Both versions return the
lexicographically first violating assignment (as an ``int64`` array) or an
empty array, so they are interchangeable and cross-checkable.

Table layout: ``sup`` is the flat row-major superposition table of length
``G**(n+1)`` (``sup[x*G**n + flat(y1..yn)] = x[y1..yn]``), ``meet`` has
length ``G*G``, ``rt`` has shape ``(n, G)``, ``rel`` is a ``(G, G)`` bool
matrix.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

_EMPTY = np.zeros(0, dtype=np.int64)
_CHUNK = 1 << 20


def _digits(G, n):
    """All n-tuples over range(G) in lexicographic order, shape (G**n, n)."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((G,) * n).reshape(n, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


def _flat(cols, G):
    idx = np.zeros(np.broadcast(*cols).shape if len(cols) > 1 else np.shape(cols[0]), dtype=np.int64)
    for c in cols:
        idx = idx * G + c
    return idx


# ----------------------------------------------------------------------
# numba kernels
# ----------------------------------------------------------------------

@njit
def _decode(f, G, n, out):
    for j in range(n - 1, -1, -1):
        out[j] = f % G
        f //= G


@njit
def _a1_nb(sup, G, n, zreps):
    Gn = G**n
    ys = np.zeros(n, np.int64)
    for x in range(G):
        for yf in range(Gn):
            _decode(yf, G, n, ys)
            xy = sup[x * Gn + yf]
            for zf in zreps:
                idx = x
                for j in range(n):
                    idx = idx * G + sup[ys[j] * Gn + zf]
                if sup[idx] != sup[xy * Gn + zf]:
                    out = np.zeros(2 * n + 1, np.int64)
                    out[0] = x
                    out[1:n + 1] = ys
                    zs = np.zeros(n, np.int64)
                    _decode(zf, G, n, zs)
                    out[n + 1:] = zs
                    return out
    return np.zeros(0, np.int64)


@njit
def _a3_nb(sup, rt, G, n):
    Gn = G**n
    ry = np.zeros(G, np.int64)
    for y in range(G):
        f = 0
        for j in range(n):
            f = f * G + rt[j, y]
        ry[y] = f
    ws = np.zeros(n, np.int64)
    for i in range(n):
        for x in range(G):
            for wf in range(Gn):
                _decode(wf, G, n, ws)
                xw = sup[x * Gn + wf]
                for y in range(G):
                    lhs = sup[xw * Gn + ry[y]]
                    idx = x
                    for j in range(n):
                        if j == i:
                            idx = idx * G + sup[ws[j] * Gn + ry[y]]
                        else:
                            idx = idx * G + ws[j]
                    if sup[idx] != lhs:
                        out = np.zeros(n + 3, np.int64)
                        out[0] = i
                        out[1] = x
                        out[2:n + 2] = ws
                        out[n + 2] = y
                        return out
    return np.zeros(0, np.int64)


@njit
def _a10_nb(sup, meet, G, n):
    Gn = G**n
    for x in range(G):
        for y in range(G):
            xy = meet[x * G + y]
            for zf in range(Gn):
                if sup[xy * Gn + zf] != meet[sup[x * Gn + zf] * G + sup[y * Gn + zf]]:
                    out = np.zeros(n + 2, np.int64)
                    out[0] = x
                    out[1] = y
                    zs = np.zeros(n, np.int64)
                    _decode(zf, G, n, zs)
                    out[2:] = zs
                    return out
    return np.zeros(0, np.int64)


@njit
def _stable_nb(sup, rel, G, n):
    Gn = G**n
    px, py = np.nonzero(rel)
    P = px.shape[0]
    Pn = P**n
    ps = np.zeros(n, np.int64)
    for p0 in range(P):
        x = px[p0]
        y = py[p0]
        for pf in range(Pn):
            _decode(pf, P, n, ps)
            ix = 0
            iy = 0
            for j in range(n):
                ix = ix * G + px[ps[j]]
                iy = iy * G + py[ps[j]]
            if not rel[sup[x * Gn + ix], sup[y * Gn + iy]]:
                out = np.zeros(2 * n + 2, np.int64)
                out[0] = x
                out[1] = y
                for j in range(n):
                    out[2 + 2 * j] = px[ps[j]]
                    out[3 + 2 * j] = py[ps[j]]
                return out
    return np.zeros(0, np.int64)


@njit
def _v_regular_nb(sup, rel, G, n):
    Gn = G**n
    px, py = np.nonzero(rel)
    P = px.shape[0]
    Pn = P**n
    ps = np.zeros(n, np.int64)
    for z in range(G):
        for pf in range(Pn):
            _decode(pf, P, n, ps)
            ix = 0
            iy = 0
            for j in range(n):
                ix = ix * G + px[ps[j]]
                iy = iy * G + py[ps[j]]
            if not rel[sup[z * Gn + ix], sup[z * Gn + iy]]:
                out = np.zeros(2 * n + 1, np.int64)
                out[0] = z
                for j in range(n):
                    out[1 + 2 * j] = px[ps[j]]
                    out[2 + 2 * j] = py[ps[j]]
                return out
    return np.zeros(0, np.int64)


@njit
def _l_regular_nb(sup, rel, G, n):
    Gn = G**n
    px, py = np.nonzero(rel)
    for p in range(px.shape[0]):
        x = px[p]
        y = py[p]
        for zf in range(Gn):
            if not rel[sup[x * Gn + zf], sup[y * Gn + zf]]:
                out = np.zeros(n + 2, np.int64)
                out[0] = x
                out[1] = y
                zs = np.zeros(n, np.int64)
                _decode(zf, G, n, zs)
                out[2:] = zs
                return out
    return np.zeros(0, np.int64)


@njit
def _i_regular_nb(sup, rel, i, G, n):
    Gn = G**n
    Gi = G**(n - 1 - i)
    px, py = np.nonzero(rel)
    ws = np.zeros(n, np.int64)
    for p in range(px.shape[0]):
        x = px[p]
        y = py[p]
        for u in range(G):
            for wf in range(Gn):
                _decode(wf, G, n, ws)
                if ws[i] != 0:
                    continue
                if not rel[sup[u * Gn + wf + x * Gi], sup[u * Gn + wf + y * Gi]]:
                    out = np.zeros(n + 3, np.int64)
                    out[0] = x
                    out[1] = y
                    out[2] = u
                    ws[i] = x
                    out[3:] = ws
                    return out
    return np.zeros(0, np.int64)


@njit
def _hom_nb(sup, T, G, n, K):
    """First (x, y) with T[x[y]] != T[x][T[y1] ... T[yn]] (composition strict)."""
    Gn = G**n
    S = T.shape[1]
    ys = np.zeros(n, np.int64)
    for x in range(G):
        for yf in range(Gn):
            _decode(yf, G, n, ys)
            tgt = sup[x * Gn + yf]
            for s in range(S):
                idx = 0
                for j in range(n):
                    v = T[ys[j], s]
                    if v < 0:
                        idx = -1
                        break
                    idx = idx * K + v
                rhs = -1 if idx < 0 else T[x, idx]
                if rhs != T[tgt, s]:
                    out = np.zeros(n + 1, np.int64)
                    out[0] = x
                    out[1:] = ys
                    return out
    return np.zeros(0, np.int64)


@njit
def _closure_nb(comp, meet, rt, U, n, gens, cap):
    """Semi-naive closure over universe codes; returns sorted codes or [-1]."""
    inset = np.zeros(U, np.bool_)
    lst = np.zeros(cap + 1, np.int64)
    count = 0
    for g in gens:
        if not inset[g]:
            if count >= cap:
                return np.full(1, -1, np.int64)
            inset[g] = True
            lst[count] = g
            count += 1
    idx = np.zeros(n + 1, np.int64)
    p = 0
    while p < count:
        e = lst[p]
        cand = np.zeros(n + 2 + p + 1, np.int64)
        nc = 0
        for j in range(n):
            cand[nc] = rt[j, e]
            nc += 1
        for a in range(p + 1):
            cand[nc] = meet[lst[a] * U + e]
            nc += 1
        for c in range(nc):
            v = cand[c]
            if not inset[v]:
                if count >= cap:
                    return np.full(1, -1, np.int64)
                inset[v] = True
                lst[count] = v
                count += 1
        # tuples over lst[0..p] whose first occurrence of index p is at slot s
        for s in range(n + 1):
            total = 1
            for j in range(n + 1):
                if j < s:
                    total *= p
                elif j > s:
                    total *= p + 1
            for t in range(total):
                r = t
                for j in range(n, -1, -1):
                    if j == s:
                        idx[j] = p
                    elif j < s:
                        idx[j] = r % p
                        r //= p
                    else:
                        idx[j] = r % (p + 1)
                        r //= p + 1
                f = 0
                for j in range(n + 1):
                    f = f * U + lst[idx[j]]
                v = comp[f]
                if not inset[v]:
                    if count >= cap:
                        return np.full(1, -1, np.int64)
                    inset[v] = True
                    lst[count] = v
                    count += 1
        p += 1
    return np.nonzero(inset)[0].astype(np.int64)


# ----------------------------------------------------------------------
# numpy kernels
# ----------------------------------------------------------------------

def _a1_np(sup, G, n, zreps):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    ydig = _digits(G, n)
    zreps = np.asarray(zreps, dtype=np.int64)
    cols = sup2[:, zreps]
    block = max(1, _CHUNK // max(zreps.size, 1))
    for x in range(G):
        for y0 in range(0, Gn, block):
            ys = ydig[y0:y0 + block]
            lhs = cols[sup2[x, y0:y0 + block]]
            idx = np.zeros(lhs.shape, dtype=np.int64)
            for j in range(n):
                idx = idx * G + cols[ys[:, j]]
            bad = sup2[x][idx] != lhs
            if bad.any():
                yi, zi = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
                return np.concatenate(([x], ys[yi], ydig[zreps[zi]])).astype(np.int64)
    return _EMPTY


def _a3_np(sup, rt, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    wdig = _digits(G, n)
    ry = _flat([np.asarray(rt[j], dtype=np.int64) for j in range(n)], G)
    rest = sup2[:, ry]  # rest[t, y] = t[R1y..Rny]
    for i in range(n):
        for x in range(G):
            lhs = rest[sup2[x]]  # (Gn, G)
            cols = [np.broadcast_to(wdig[:, j:j + 1], lhs.shape) for j in range(n)]
            cols[i] = rest[wdig[:, i]]
            rhs = sup2[x][_flat(cols, G)]
            bad = rhs != lhs
            if bad.any():
                wf, y = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
                return np.concatenate(([i, x], wdig[wf], [y])).astype(np.int64)
    return _EMPTY


def _a10_np(sup, meet, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    meet2 = np.asarray(meet, dtype=np.int64).reshape(G, G)
    zdig = _digits(G, n)
    for x in range(G):
        lhs = sup2[meet2[x]]  # (G, Gn)
        rhs = meet2[sup2[x][None, :], sup2]
        bad = lhs != rhs
        if bad.any():
            y, zf = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
            return np.concatenate(([x, y], zdig[zf])).astype(np.int64)
    return _EMPTY


def _pair_tuples(P, n, lo, hi):
    """Rows lo..hi-1 of the lexicographic enumeration of range(P)**n."""
    f = np.arange(lo, hi, dtype=np.int64)
    out = np.zeros((f.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = f % P
        f //= P
    return out


def _stable_np(sup, rel, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    px, py = np.nonzero(rel)
    P = px.size
    Pn = P**n
    for p0 in range(P):
        x, y = px[p0], py[p0]
        for lo in range(0, Pn, _CHUNK):
            ps = _pair_tuples(P, n, lo, min(Pn, lo + _CHUNK))
            ix = _flat([px[ps[:, j]] for j in range(n)], G)
            iy = _flat([py[ps[:, j]] for j in range(n)], G)
            bad = ~rel[sup2[x][ix], sup2[y][iy]]
            if bad.any():
                k = np.flatnonzero(bad)[0]
                inner = np.stack([px[ps[k]], py[ps[k]]], axis=1).reshape(-1)
                return np.concatenate(([x, y], inner)).astype(np.int64)
    return _EMPTY


def _v_regular_np(sup, rel, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    px, py = np.nonzero(rel)
    P = px.size
    Pn = P**n
    for z in range(G):
        for lo in range(0, Pn, _CHUNK):
            ps = _pair_tuples(P, n, lo, min(Pn, lo + _CHUNK))
            ix = _flat([px[ps[:, j]] for j in range(n)], G)
            iy = _flat([py[ps[:, j]] for j in range(n)], G)
            bad = ~rel[sup2[z][ix], sup2[z][iy]]
            if bad.any():
                k = np.flatnonzero(bad)[0]
                inner = np.stack([px[ps[k]], py[ps[k]]], axis=1).reshape(-1)
                return np.concatenate(([z], inner)).astype(np.int64)
    return _EMPTY


def _l_regular_np(sup, rel, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    px, py = np.nonzero(rel)
    zdig = _digits(G, n)
    bad = ~rel[sup2[px], sup2[py]]  # (P, Gn)
    if bad.any():
        p, zf = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
        return np.concatenate(([px[p], py[p]], zdig[zf])).astype(np.int64)
    return _EMPTY


def _i_regular_np(sup, rel, i, G, n):
    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    px, py = np.nonzero(rel)
    wdig = _digits(G, n)
    keep = wdig[:, i] == 0
    wsub = wdig[keep]
    wf = np.flatnonzero(keep)
    Gi = G**(n - 1 - i)
    for p in range(px.size):
        x, y = px[p], py[p]
        bad = ~rel[sup2[:, wf + x * Gi], sup2[:, wf + y * Gi]]  # (u, w)
        if bad.any():
            u, k = np.unravel_index(np.flatnonzero(bad)[0], bad.shape)
            w = wsub[k].copy()
            w[i] = x
            return np.concatenate(([x, y, u], w)).astype(np.int64)
    return _EMPTY


def _hom_np(sup, T, G, n, K):
    # evaluates each distinct combination of image rows once
    from .nfun import compose_tables

    Gn = G**n
    sup2 = np.asarray(sup, dtype=np.int64).reshape(G, Gn)
    T = np.asarray(T, dtype=np.int64)
    if T.shape[1] == 0:
        return _EMPTY
    uniq, rid = np.unique(T, axis=0, return_inverse=True)
    rid = rid.reshape(-1)
    D = uniq.shape[0]
    ydig = _digits(G, n)
    key = rid[:, None] * D**n + _flat([rid[ydig[:, j]] for j in range(n)], D)[None, :]
    target = rid[sup2].reshape(-1)
    ukeys, inv = np.unique(key.reshape(-1), return_inverse=True)
    kd = np.empty((ukeys.size, n + 1), dtype=np.int64)
    rem = ukeys.copy()
    for j in range(n, -1, -1):
        kd[:, j] = rem % D
        rem //= D
    dt = np.dtype((np.void, 8 * uniq.shape[1]))
    ukv = np.ascontiguousarray(uniq).view(dt).reshape(-1)  # sorted: np.unique sorts rows
    composed = np.empty(ukeys.size, dtype=np.int64)
    step = max(1, _CHUNK // uniq.shape[1])
    for lo in range(0, ukeys.size, step):
        k = kd[lo:lo + step]
        rows = compose_tables(uniq[k[:, 0]], [uniq[k[:, j + 1]] for j in range(n)], K, n)
        rk = np.ascontiguousarray(rows, dtype=np.int64).view(dt).reshape(-1)
        order = np.argsort(ukv)
        pos = np.minimum(np.searchsorted(ukv[order], rk), D - 1)
        composed[lo:lo + step] = np.where(ukv[order][pos] == rk, order[pos], -1)
    bad = composed[inv.reshape(-1)] != target
    hit = np.flatnonzero(bad)
    if hit.size == 0:
        return _EMPTY
    x, yf = divmod(int(hit[0]), Gn)
    return np.concatenate(([x], ydig[yf])).astype(np.int64)


def _closure_np(comp, meet, rt, U, n, gens, cap):
    comp_t = np.asarray(comp).reshape((U,) * (n + 1))
    meet2 = np.asarray(meet).reshape(U, U)
    members = np.unique(np.asarray(gens, dtype=np.int64))
    if members.size > cap:
        return np.full(1, -1, np.int64)
    while True:
        produced = [comp_t[np.ix_(*([members] * (n + 1)))].reshape(-1),
                    meet2[np.ix_(members, members)].reshape(-1)]
        produced += [np.asarray(rt[j])[members] for j in range(n)]
        nxt = np.union1d(members, np.concatenate(produced))
        if nxt.size > cap:
            return np.full(1, -1, np.int64)
        if nxt.size == members.size:
            return members.astype(np.int64)
        members = nxt


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------

NUMBA_KERNELS = {
    "a1": _a1_nb, "a3": _a3_nb, "a10": _a10_nb, "stable": _stable_nb,
    "v_regular": _v_regular_nb, "l_regular": _l_regular_nb,
    "i_regular": _i_regular_nb, "closure": _closure_nb, "homomorphism": _hom_nb,
}
NUMPY_KERNELS = {
    "a1": _a1_np, "a3": _a3_np, "a10": _a10_np, "stable": _stable_np,
    "v_regular": _v_regular_np, "l_regular": _l_regular_np,
    "i_regular": _i_regular_np, "closure": _closure_np, "homomorphism": _hom_np,
}


def _impl(name, backend):
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        return NUMBA_KERNELS[name]
    if backend == "numpy":
        return NUMPY_KERNELS[name]
    raise ValueError(f"unknown backend {backend!r}")


def _contig(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def column_representatives(sup, G, n):
    """First inner-tuple index of every distinct column ``t -> t[z]``, ascending.

    A1 depends on the inner tuple only through this column, so sweeping
    representatives preserves the lexicographically first counterexample.
    """
    cols = np.asarray(sup).reshape(G, G**n).T
    _, first = np.unique(cols, axis=0, return_index=True)
    return np.sort(first).astype(np.int64)


def a1_violation(sup, G, n, backend=None):
    return _impl("a1", backend)(_contig(sup), G, n, column_representatives(sup, G, n))


def a3_violation(sup, rt, G, n, backend=None):
    return _impl("a3", backend)(_contig(sup), _contig(rt), G, n)


def a10_violation(sup, meet, G, n, backend=None):
    return _impl("a10", backend)(_contig(sup), _contig(meet), G, n)


def stable_violation(sup, rel, G, n, backend=None):
    return _impl("stable", backend)(_contig(sup), np.ascontiguousarray(rel, dtype=np.bool_), G, n)


def v_regular_violation(sup, rel, G, n, backend=None):
    return _impl("v_regular", backend)(_contig(sup), np.ascontiguousarray(rel, dtype=np.bool_), G, n)


def l_regular_violation(sup, rel, G, n, backend=None):
    return _impl("l_regular", backend)(_contig(sup), np.ascontiguousarray(rel, dtype=np.bool_), G, n)


def i_regular_violation(sup, rel, i, G, n, backend=None):
    """``i`` is 0-based here."""
    return _impl("i_regular", backend)(_contig(sup), np.ascontiguousarray(rel, dtype=np.bool_), i, G, n)


def closure_codes(comp, meet, rt, U, n, gens, cap, backend=None):
    return _impl("closure", backend)(_contig(comp), _contig(meet), _contig(rt), U, n, _contig(gens), cap)


def homomorphism_violation(sup, tables, G, n, K, backend=None):
    """First ``(x, y1..yn)`` where the image tables fail to preserve superposition."""
    return _impl("homomorphism", backend)(_contig(sup), _contig(tables), G, n, K)
