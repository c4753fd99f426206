"""Hot loops: all-pairs BFS, walk-length tables, power-graph coloring and
color reduction on powers of paths.

Each kernel has a numba version and a plain numpy version with identical
results. Set ``LOCALITY_LAB_NO_JIT=1`` to force the numpy versions (numba is
then never imported).
"""
from __future__ import annotations

import os

import numpy as np

USE_JIT = os.environ.get("LOCALITY_LAB_NO_JIT", "") not in ("1", "true", "yes")

if USE_JIT:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_JIT = False

BACKEND = "numba" if USE_JIT else "numpy"


def csr(adj) -> tuple[np.ndarray, np.ndarray]:
    """Compressed adjacency from per-node neighbor lists."""
    n = len(adj)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    indices = np.fromiter((u for nb in adj for u in nb), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


# --- numpy versions ------------------------------------------------------


def _apsp_numpy(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    dist = np.full((n, n), -1, dtype=np.int32)
    deg = np.diff(indptr)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        frontier = np.array([s], dtype=np.int64)
        d = 0
        while frontier.size:
            d += 1
            starts = indptr[frontier]
            counts = deg[frontier]
            if counts.sum() == 0:
                break
            # gather all neighbors of the frontier in one shot
            offs = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
            nb = indices[np.arange(counts.sum()) + offs]
            nb = np.unique(nb[row[nb] < 0])
            row[nb] = d
            frontier = nb
    return dist


def _walk_table_numpy(trans: np.ndarray, max_len: int) -> np.ndarray:
    s = trans.shape[0]
    out = np.zeros((max_len + 1, s, s), dtype=np.uint8)
    out[0] = np.eye(s, dtype=np.uint8)
    t = trans.astype(np.int64)
    for d in range(1, max_len + 1):
        out[d] = (out[d - 1].astype(np.int64) @ t > 0).astype(np.uint8)
    return out


def _power_coloring_numpy(dist: np.ndarray, k: int) -> np.ndarray:
    n = dist.shape[0]
    color = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        near = (dist[v] >= 0) & (dist[v] <= k)
        near[v] = False
        used = color[near]
        used = np.unique(used[used >= 0])
        c = 0
        for u in used:
            if u != c:
                break
            c += 1
        color[v] = c
    return color


def _power_cv_numpy(uid: np.ndarray, k: int, cyc: bool) -> np.ndarray:
    m = len(uid)
    offs = np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)])
    pos = np.arange(m)[:, None] + offs[None, :]
    if cyc:
        valid = np.ones_like(pos, dtype=bool)
        pos = pos % m
    else:
        valid = (pos >= 0) & (pos < m)
        pos = np.where(valid, pos, 0)
    nbu = np.where(valid, uid[pos], -1)
    out_mask = valid & (nbu > uid[:, None])
    key = np.where(out_mask, nbu, np.iinfo(np.int64).max)
    srt = np.argsort(key, axis=1, kind="stable")
    par = np.take_along_axis(pos, srt, axis=1)
    has = np.take_along_axis(out_mask, srt, axis=1)
    parent = np.where(has, par, -1).T
    color = np.broadcast_to(uid, parent.shape).copy()
    rows = np.arange(parent.shape[0])[:, None]
    while color.max(initial=0) >= 6:
        other = np.where(parent >= 0, color[rows, np.maximum(parent, 0)], color ^ 1)
        diff = color ^ other
        if not diff.all():
            raise ValueError("equal colors across a forest edge")
        i = np.log2(diff & -diff).astype(np.int64)
        color = 2 * i + ((color >> i) & 1)
    return np.ascontiguousarray(color.T)


def _color_sweep_plain(indptr, indices, dist, side, order, T):
    """Flat-array replay of the online 3-coloring session on a bipartite
    graph. Node handles are first-seen indices, exactly as in the engine, so
    group ids, barrier order and commitments match the object version.

    Returns (labels, committed, stats) with labels and committed indexed by
    global node (-1 where absent) and stats = [max_border,
    max_commit_radius, commitments, violations, escaped, new, extend, merge].
    """
    n = dist.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    local_of = np.full(n, -1, dtype=np.int64)
    global_of = np.full(n, -1, dtype=np.int64)
    color = np.full(n, -1, dtype=np.int64)
    rdist = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    node_group = np.full(n, -1, dtype=np.int64)
    # groups: union-find parents plus per-root data; colored is a linked list
    gparent = np.zeros(n + 1, dtype=np.int64)
    border = np.zeros(n + 1, dtype=np.int64)
    size = np.zeros(n + 1, dtype=np.int64)
    parity = np.zeros(n + 1, dtype=np.int64)
    anchor = np.zeros(n + 1, dtype=np.int64)
    head = np.full(n + 1, -1, dtype=np.int64)
    tail = np.full(n + 1, -1, dtype=np.int64)
    length = np.zeros(n + 1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    fresh = np.empty(n, dtype=np.int64)
    keys = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    mark = np.zeros(n + 1, dtype=np.int64)
    nbrs = np.empty(n, dtype=np.int64)
    stats = np.zeros(8, dtype=np.int64)
    ngroups = 0
    seen = 0
    for step in range(order.shape[0]):
        v = order[step]
        if labels[v] >= 0:
            continue
        row = dist[v]
        nf = 0
        for g in range(n):
            d = row[g]
            if d >= 0 and d <= T and local_of[g] < 0:
                fresh[nf] = g
                keys[nf] = d * n + g
                nf += 1
        srt = np.argsort(keys[:nf])
        for i in range(nf):
            g = fresh[srt[i]]
            local_of[g] = seen
            global_of[seen] = g
            seen += 1
        lv = local_of[v]
        nt = 0
        for g in range(n):
            d = row[g]
            if d < 0 or d > T + 1:
                continue
            x = local_of[g]
            if x < 0:
                continue
            if d <= T and d < rdist[x]:
                rdist[x] = d
            r = node_group[x]
            if r < 0:
                continue
            while gparent[r] != r:
                r = gparent[r]
            if mark[r] == 0:
                mark[r] = 1
                touched[nt] = r
                nt += 1
        for i in range(nt):
            mark[touched[i]] = 0
        tl = np.sort(touched[:nt])
        if nt == 0:
            stats[5] += 1
            gid = ngroups
            ngroups += 1
            gparent[gid] = gid
            border[gid] = 0
            size[gid] = 0
            parity[gid] = 0
            anchor[gid] = lv
            col = 0
        else:
            stats[6 if nt == 1 else 7] += 1
            gid = tl[0]
            for j in range(1, nt):
                a = gid
                b = tl[j]
                rel = side[global_of[anchor[a]]] ^ side[global_of[anchor[b]]]
                if (parity[a] ^ parity[b]) != rel:
                    s = a if border[a] <= border[b] else b
                    limit = 3 * (border[s] + 1)
                    for src in range(3):
                        dst = (src + 1) % 3
                        cnt = length[s]
                        x = head[s]
                        for _ in range(cnt):
                            cur = x
                            x = nxt[x]
                            if color[cur] != src:
                                continue
                            if rdist[cur] > T - 1:
                                stats[4] = 1
                                return labels, color, stats
                            gx = global_of[cur]
                            nn = 0
                            for p in range(indptr[gx], indptr[gx + 1]):
                                w = local_of[indices[p]]
                                if w >= 0 and color[w] < 0:
                                    nbrs[nn] = w
                                    nn += 1
                            for k in range(nn):
                                w = nbrs[k]
                                color[w] = dst
                                if tail[s] < 0:
                                    head[s] = w
                                else:
                                    nxt[tail[s]] = w
                                tail[s] = w
                                length[s] += 1
                                stats[2] += 1
                                rr = rdist[w]
                                if rr > stats[1]:
                                    stats[1] = rr
                                if rr > limit:
                                    stats[3] += 1
                    border[s] += 1
                    parity[s] ^= 1
                gparent[b] = a
                if border[b] > border[a]:
                    border[a] = border[b]
                size[a] += size[b]
                if length[b] > 0:
                    if tail[a] < 0:
                        head[a] = head[b]
                    else:
                        nxt[tail[a]] = head[b]
                    tail[a] = tail[b]
                    length[a] += length[b]
                if border[a] > stats[0]:
                    stats[0] = border[a]
                gid = a
            if color[lv] >= 0:
                col = color[lv]
            else:
                col = (parity[gid] + (side[v] ^ side[global_of[anchor[gid]]])) % 2
        for i in range(nf):
            node_group[local_of[fresh[i]]] = gid
        size[gid] += nf
        if color[lv] < 0:
            color[lv] = col
            if tail[gid] < 0:
                head[gid] = lv
            else:
                nxt[tail[gid]] = lv
            tail[gid] = lv
            length[gid] += 1
        labels[v] = col
        if size[gid] < (1 << border[gid]):
            stats[3] += 1
    committed = np.full(n, -1, dtype=np.int64)
    for x in range(seen):
        committed[global_of[x]] = color[x]
    return labels, committed, stats


# --- numba versions ------------------------------------------------------

if USE_JIT:
    _jit = numba.njit(cache=True, nogil=True)

    _color_sweep_jit = _jit(_color_sweep_plain)

    @_jit
    def _apsp_jit(indptr, indices, n):
        dist = np.full((n, n), -1, dtype=np.int32)
        queue = np.empty(n, dtype=np.int64)
        for s in range(n):
            dist[s, s] = 0
            head = 0
            tail = 1
            queue[0] = s
            while head < tail:
                u = queue[head]
                head += 1
                du = dist[s, u]
                for p in range(indptr[u], indptr[u + 1]):
                    w = indices[p]
                    if dist[s, w] < 0:
                        dist[s, w] = du + 1
                        queue[tail] = w
                        tail += 1
        return dist

    @_jit
    def _walk_table_jit(trans, max_len):
        s = trans.shape[0]
        out = np.zeros((max_len + 1, s, s), dtype=np.uint8)
        for a in range(s):
            out[0, a, a] = 1
        for d in range(1, max_len + 1):
            for a in range(s):
                for m in range(s):
                    if out[d - 1, a, m]:
                        for b in range(s):
                            if trans[m, b]:
                                out[d, a, b] = 1
        return out

    @_jit
    def _power_coloring_jit(dist, k):
        n = dist.shape[0]
        color = np.full(n, -1, dtype=np.int64)
        taken = np.zeros(n + 1, dtype=np.uint8)
        for v in range(n):
            for u in range(n):
                if u != v and dist[v, u] >= 0 and dist[v, u] <= k and color[u] >= 0:
                    taken[color[u]] = 1
            c = 0
            while taken[c]:
                c += 1
            color[v] = c
            taken[:] = 0
        return color

    @_jit
    def _power_cv_jit(uid, k, cyc):
        m = uid.shape[0]
        f = 2 * k
        parent = np.full((f, m), -1, dtype=np.int64)
        cand = np.empty(f, dtype=np.int64)
        for p in range(m):
            c = 0
            for d in range(-k, k + 1):
                if d == 0:
                    continue
                q = p + d
                if cyc:
                    q %= m
                elif q < 0 or q >= m:
                    continue
                if uid[q] > uid[p]:
                    cand[c] = q
                    c += 1
            keys = np.empty(c, dtype=np.int64)
            for a in range(c):
                keys[a] = uid[cand[a]]
            srt = np.argsort(keys)
            for j in range(c):
                parent[j, p] = cand[srt[j]]
        color = np.empty((f, m), dtype=np.int64)
        for j in range(f):
            for p in range(m):
                color[j, p] = uid[p]
        new = np.empty((f, m), dtype=np.int64)
        # all forests advance in lockstep, as one synchronous round each
        while True:
            big = False
            for j in range(f):
                for p in range(m):
                    if color[j, p] >= 6:
                        big = True
            if not big:
                break
            for j in range(f):
                for p in range(m):
                    cp = color[j, p]
                    q = parent[j, p]
                    other = color[j, q] if q >= 0 else cp ^ 1
                    diff = cp ^ other
                    if diff == 0:
                        raise ValueError("equal colors across a forest edge")
                    i = 0
                    while not (diff >> i) & 1:
                        i += 1
                    new[j, p] = 2 * i + ((cp >> i) & 1)
            color[:, :] = new
        return np.ascontiguousarray(color.T)



def all_pairs_distances(adj) -> np.ndarray:
    """Hop-distance matrix (int32, -1 for unreachable pairs)."""
    n = len(adj)
    indptr, indices = csr(adj)
    if USE_JIT:
        return _apsp_jit(indptr, indices, n)
    return _apsp_numpy(indptr, indices, n)


def walk_table(trans: np.ndarray, max_len: int) -> np.ndarray:
    """out[d, a, b] == 1 iff a length-d walk a->b exists."""
    trans = np.ascontiguousarray(trans, dtype=np.uint8)
    if USE_JIT:
        return _walk_table_jit(trans, max_len)
    return _walk_table_numpy(trans, max_len)


def power_graph_coloring(dist: np.ndarray, k: int) -> np.ndarray:
    """Greedy first-fit coloring of the k-th power graph in node order."""
    dist = np.ascontiguousarray(dist, dtype=np.int32)
    if USE_JIT:
        return _power_coloring_jit(dist, k)
    return _power_coloring_numpy(dist, k)


def power_cv_coloring(uid: np.ndarray, k: int, cyc: bool) -> np.ndarray:
    """(m, 2k) array of per-forest colors below 6; rows differ for any two
    nodes within distance k on the path/cycle given in order."""
    uid = np.ascontiguousarray(uid, dtype=np.int64)
    if USE_JIT:
        return _power_cv_jit(uid, k, cyc)
    return _power_cv_numpy(uid, k, cyc)


def color_sweep(indptr, indices, dist, side, order, T: int):
    """Run the online 3-coloring session over one reveal order; see
    ``_color_sweep_plain`` for the return layout."""
    args = (np.ascontiguousarray(indptr, dtype=np.int64), np.ascontiguousarray(indices, dtype=np.int64),
            np.ascontiguousarray(dist, dtype=np.int32), np.ascontiguousarray(side, dtype=np.int64),
            np.ascontiguousarray(order, dtype=np.int64), int(T))
    if USE_JIT:
        return _color_sweep_jit(*args)
    return _color_sweep_plain(*args)
