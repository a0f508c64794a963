"""Compiled inner loops (union-find congruence closure and friends)."""
import numpy as np
import numba as nb


@nb.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@nb.njit(cache=True)
def _normalize(parent):
    n = parent.shape[0]
    lab = np.full(n, -1, np.int64)
    root_lab = np.full(n, -1, np.int64)
    nxt = 0
    for i in range(n):
        r = _find(parent, i)
        if root_lab[r] < 0:
            root_lab[r] = nxt
            nxt += 1
        lab[i] = root_lab[r]
    return lab


@nb.njit(cache=True)
def _close(trans, parent, xs, ys):
    # Pending edges are exactly the successful unions, so at most n-1 of
    # them plus the seeds; translating spanning edges suffices because
    # every translation is a unary map.
    # trans[x, r] is translation r applied to x (element-major for locality)
    n = trans.shape[0]
    cap = n + xs.shape[0] + 1
    sx = np.empty(cap, np.int64)
    sy = np.empty(cap, np.int64)
    sp = 0
    for k in range(xs.shape[0]):
        rx = _find(parent, xs[k])
        ry = _find(parent, ys[k])
        if rx != ry:
            parent[rx] = ry
            sx[sp] = xs[k]
            sy[sp] = ys[k]
            sp += 1
    while sp > 0:
        sp -= 1
        x = sx[sp]
        y = sy[sp]
        tx = trans[x]
        ty = trans[y]
        for r in range(trans.shape[1]):
            u = tx[r]
            v = ty[r]
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru != rv:
                parent[ru] = rv
                sx[sp] = u
                sy[sp] = v
                sp += 1
    return parent


@nb.njit(cache=True)
def close_pairs(trans, xs, ys):
    """Smallest congruence containing the pairs (xs[k], ys[k])."""
    n = trans.shape[0]
    parent = np.arange(n)
    _close(trans, parent, xs, ys)
    return _normalize(parent)


@nb.njit(cache=True)
def close_from(trans, labels, xs, ys):
    """Smallest congruence containing the partition ``labels`` and the pairs."""
    n = trans.shape[0]
    first = np.full(n, -1, np.int64)
    for i in range(n):
        if first[labels[i]] < 0:
            first[labels[i]] = i
    # every pre-merged pair must also be translated
    m = 0
    for i in range(n):
        if first[labels[i]] != i:
            m += 1
    ax = np.empty(m + xs.shape[0], np.int64)
    ay = np.empty(m + xs.shape[0], np.int64)
    k = 0
    for i in range(n):
        if first[labels[i]] != i:
            ax[k] = i
            ay[k] = first[labels[i]]
            k += 1
    for j in range(xs.shape[0]):
        ax[k] = xs[j]
        ay[k] = ys[j]
        k += 1
    parent = np.arange(n)
    _close(trans, parent, ax, ay)
    return _normalize(parent)


@nb.njit(cache=True)
def all_principal(trans, pairs_x, pairs_y):
    """Principal congruences for a batch of pairs, one row each."""
    n = trans.shape[0]
    out = np.empty((pairs_x.shape[0], n), np.int64)
    one_x = np.empty(1, np.int64)
    one_y = np.empty(1, np.int64)
    for k in range(pairs_x.shape[0]):
        parent = np.arange(n)
        one_x[0] = pairs_x[k]
        one_y[0] = pairs_y[k]
        _close(trans, parent, one_x, one_y)
        out[k] = _normalize(parent)
    return out


@nb.njit(cache=True)
def join_partitions(a, b):
    n = a.shape[0]
    parent = np.arange(n)
    fa = np.full(n, -1, np.int64)
    fb = np.full(n, -1, np.int64)
    for i in range(n):
        if fa[a[i]] < 0:
            fa[a[i]] = i
        else:
            ra = _find(parent, i)
            rb = _find(parent, fa[a[i]])
            if ra != rb:
                parent[ra] = rb
        if fb[b[i]] < 0:
            fb[b[i]] = i
        else:
            ra = _find(parent, i)
            rb = _find(parent, fb[b[i]])
            if ra != rb:
                parent[ra] = rb
    return _normalize(parent)


@nb.njit(cache=True)
def join_many(base, others):
    """Row k of the result is the join of ``base`` with ``others[k]``."""
    out = np.empty(others.shape, np.int64)
    for k in range(others.shape[0]):
        out[k] = join_partitions(base, others[k])
    return out


# ---------------------------------------------------------------- closures

@nb.njit(cache=True)
def apply_rows(vecs, args, flat, tab_off, size, mult):
    """Apply one operation coordinatewise to rows of ``vecs`` and hash the results.

    Coordinate c reads its table from ``flat[tab_off[c]:]`` (row-major over an
    algebra of ``size[c]`` elements).
    """
    m, k = args.shape
    L = vecs.shape[1]
    out = np.empty((m, L), np.uint8)
    hs = np.empty(m, np.uint64)
    for r in range(m):
        h = np.uint64(0)
        for c in range(L):
            idx = 0
            for j in range(k):
                idx = idx * size[c] + vecs[args[r, j], c]
            v = flat[tab_off[c] + idx]
            out[r, c] = v
            h += np.uint64(v) * mult[c]
        hs[r] = h
    return out, hs


@nb.njit(cache=True)
def table_insert(keys, vals, h, idx):
    mask = keys.shape[0] - 1
    slot = np.int64(h & np.uint64(mask))
    while vals[slot] >= 0:
        slot = (slot + 1) & mask
    keys[slot] = h
    vals[slot] = idx


@nb.njit(cache=True)
def table_lookup(keys, vals, vecs, rows, hs):
    """Index of each row in ``vecs`` (hash table probe plus exact compare), -1 if absent."""
    mask = keys.shape[0] - 1
    m, L = rows.shape
    out = np.full(m, -1, np.int64)
    for r in range(m):
        slot = np.int64(hs[r] & np.uint64(mask))
        while vals[slot] >= 0:
            if keys[slot] == hs[r]:
                i = vals[slot]
                same = True
                for c in range(L):
                    if vecs[i, c] != rows[r, c]:
                        same = False
                        break
                if same:
                    out[r] = i
                    break
            slot = (slot + 1) & mask
    return out


@nb.njit(cache=True)
def hash_rows(rows, mult):
    m, L = rows.shape
    out = np.empty(m, np.uint64)
    for r in range(m):
        h = np.uint64(0)
        for c in range(L):
            h += np.uint64(rows[r, c] + 1) * mult[c]
        out[r] = h
    return out


@nb.njit(cache=True)
def fresh_binary(vecs, lo, hi, flat, tab_off, size, mult, keys, vals, symmetric):
    """Pairs (a, b) over [0, hi) with max(a, b) >= lo whose image under a
    binary operation is not yet stored; returns (a, b, hash) arrays.
    ``symmetric`` (a commutative operation) restricts to b <= a.

    The candidate row lives in a scratch buffer, so known results (the vast
    majority in late rounds) are never materialized.
    """
    L = vecs.shape[1]
    mask = keys.shape[0] - 1
    buf = np.empty(L, np.uint8)
    cap = 1024
    oa = np.empty(cap, np.int64)
    ob = np.empty(cap, np.int64)
    oh = np.empty(cap, np.uint64)
    m = 0
    for a in range(hi):
        b0 = 0 if a >= lo else lo
        b1 = a + 1 if symmetric else hi
        for b in range(b0, b1):
            h = np.uint64(0)
            for c in range(L):
                v = flat[tab_off[c] + vecs[a, c] * size[c] + vecs[b, c]]
                buf[c] = v
                h += np.uint64(v) * mult[c]
            slot = np.int64(h & np.uint64(mask))
            found = False
            while vals[slot] >= 0:
                if keys[slot] == h:
                    i = vals[slot]
                    same = True
                    for c in range(L):
                        if vecs[i, c] != buf[c]:
                            same = False
                            break
                    if same:
                        found = True
                        break
                slot = (slot + 1) & mask
            if not found:
                if m == cap:
                    cap *= 2
                    na = np.empty(cap, np.int64)
                    nb_ = np.empty(cap, np.int64)
                    nh = np.empty(cap, np.uint64)
                    na[:m] = oa[:m]
                    nb_[:m] = ob[:m]
                    nh[:m] = oh[:m]
                    oa, ob, oh = na, nb_, nh
                oa[m] = a
                ob[m] = b
                oh[m] = h
                m += 1
    return oa[:m], ob[:m], oh[:m]


@nb.njit(cache=True)
def binary_op_table(vecs, N, flat, tab_off, size, mult, keys, vals, symmetric, out):
    """out[a, b] = index of op(a, b) among the stored rows, -1 if absent."""
    L = vecs.shape[1]
    mask = keys.shape[0] - 1
    buf = np.empty(L, np.uint8)
    for a in range(N):
        b1 = a + 1 if symmetric else N
        for b in range(b1):
            h = np.uint64(0)
            for c in range(L):
                v = flat[tab_off[c] + vecs[a, c] * size[c] + vecs[b, c]]
                buf[c] = v
                h += np.uint64(v) * mult[c]
            slot = np.int64(h & np.uint64(mask))
            res = -1
            while vals[slot] >= 0:
                if keys[slot] == h:
                    i = vals[slot]
                    same = True
                    for c in range(L):
                        if vecs[i, c] != buf[c]:
                            same = False
                            break
                    if same:
                        res = i
                        break
                slot = (slot + 1) & mask
            out[a, b] = res
            if symmetric:
                out[b, a] = res


@nb.njit(cache=True)
def is_hom_binary(table, h, qtab):
    """Whether h[table[a, b]] == qtab[h[a], h[b]] for all a, b; else the
    first failing pair as (a, b)."""
    N = table.shape[0]
    for a in range(N):
        ha = h[a]
        for b in range(N):
            if h[table[a, b]] != qtab[ha, h[b]]:
                return False, a, b
    return True, -1, -1


@nb.njit(cache=True)
def tuple_search(vecs, n, S, ext, bad, cap, stop_first, start):
    """Depth-first search over n-tuples of rows of ``vecs`` whose codes are
    admissible at every coordinate (``ext[j]`` marks admissible prefixes of
    length j, codes in base S).  A complete tuple is a hit when some
    coordinate code is marked in ``bad``.

    Returns (status, tuple, coordinate, count): status 1 on a hit, 0 when
    the search is exhausted, -1 when ``cap`` nodes were visited.  ``count``
    is the number of admissible complete tuples seen.  A non-negative
    ``start[0]`` resumes the search just after the tuple ``start``.
    """
    N = vecs.shape[0]
    L = vecs.shape[1]
    codes = np.zeros((n + 1, L), np.int64)
    pos = np.zeros(n + 1, np.int64)
    tup = np.zeros(n, np.int64)
    nodes = 0
    count = 0
    depth = 0
    pos[0] = 0
    if n > 0 and start[0] >= 0:
        for j in range(n):
            tup[j] = start[j]
            pos[j] = start[j] + 1
            if j < n - 1:
                for c in range(L):
                    codes[j + 1, c] = codes[j, c] * S + vecs[start[j], c]
        depth = n - 1
    while depth >= 0:
        if depth == n:
            count += 1
            for c in range(L):
                if bad[c, codes[n, c]]:
                    return 1, tup, c, count
            if stop_first:
                return 1, tup, -1, count
            depth -= 1
            continue
        found = False
        u = pos[depth]
        while u < N:
            nodes += 1
            if nodes > cap:
                return -1, tup, -1, count
            ok = True
            for c in range(L):
                code = codes[depth, c] * S + vecs[u, c]
                if not ext[depth + 1, c, code]:
                    ok = False
                    break
            if ok:
                found = True
                break
            u += 1
        if not found:
            depth -= 1
            continue
        tup[depth] = u
        pos[depth] = u + 1
        for c in range(L):
            codes[depth + 1, c] = codes[depth, c] * S + vecs[u, c]
        depth += 1
        if depth < n:
            pos[depth] = 0
    return 0, tup, -1, count
