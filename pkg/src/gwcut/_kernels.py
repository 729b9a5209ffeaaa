"""Compiled inner loops (numba).

All kernels are serial `nogil` functions operating on flat arrays; callers
parallelise by slicing vertex ranges across Python threads. Each vertex's
output is written exactly once, so results are bitwise identical for any
thread count. `cache=True` keeps compilation a one-off per machine.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# Sentinel for an empty adjacency slot while an edge swap is in flight.
NO_EDGE = -1


@njit(nogil=True, cache=True)
def shell_filter_range(indptr, indices, x, coeffs, out, u_lo, u_hi, stamp, queue):
    """out[u] = sum_k coeffs[k] * sum_{dist(u,v)=k} x[v] for u in [u_lo, u_hi).

    Truncated breadth-first search per centre; `stamp`/`queue` are int32[n]
    scratch arrays owned by the calling thread. `stamp` must start all-zero
    and is left re-usable (tokens are centre ids, unique within one call).
    """
    K = coeffs.shape[0] - 1
    for u in range(u_lo, u_hi):
        tok = u + 1
        stamp[u] = tok
        queue[0] = u
        acc = coeffs[0] * x[u]
        start, end = 0, 1
        for k in range(1, K + 1):
            s = 0.0
            nxt = end
            for qi in range(start, end):
                v = queue[qi]
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    if stamp[w] != tok:
                        stamp[w] = tok
                        queue[nxt] = w
                        nxt += 1
                        s += x[w]
            acc += coeffs[k] * s
            start, end = end, nxt
            if start == end:
                break
        out[u] = acc


@njit(nogil=True, cache=True)
def girth_scan_range(indptr, indices, u_lo, u_hi, bound, stamp, dist, parent, queue):
    """Shortest cycle length discoverable from roots in [u_lo, u_hi), if < bound.

    Returns min(bound, shortest cycle through any scanned root). Per-root BFS
    truncates once 2*depth >= current best, so with a finite bound this is a
    cheap local scan. Scanning all roots with bound > n yields the exact girth.
    """
    best = bound
    for u in range(u_lo, u_hi):
        tok = u + 1
        stamp[u] = tok
        dist[u] = 0
        parent[u] = -1
        queue[0] = u
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            d = dist[v]
            if 2 * d >= best:
                break
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if stamp[w] != tok:
                    stamp[w] = tok
                    dist[w] = d + 1
                    parent[w] = v
                    queue[tail] = w
                    tail += 1
                elif w != parent[v]:
                    cand = d + dist[w] + 1
                    if cand < best:
                        best = cand
    return best


@njit(nogil=True, cache=True)
def count_components(indptr, indices):
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int32)
    comps = 0
    for s in range(n):
        if seen[s]:
            continue
        comps += 1
        seen[s] = 1
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if not seen[w]:
                    seen[w] = 1
                    queue[tail] = w
                    tail += 1
    return comps


@njit(nogil=True, cache=True)
def ball_stats_range(indptr, indices, centers, r, sizes, edges, c_lo, c_hi, stamp, queue):
    """|ball(u, r)| and the induced edge count of the ball, per centre.

    Results go to sizes[i]/edges[i] for centre index i in [c_lo, c_hi).
    """
    for ci in range(c_lo, c_hi):
        u = centers[ci]
        tok = ci + 1
        stamp[u] = tok
        queue[0] = u
        start, end = 0, 1
        for _k in range(r):
            nxt = end
            for qi in range(start, end):
                v = queue[qi]
                for e in range(indptr[v], indptr[v + 1]):
                    w = indices[e]
                    if stamp[w] != tok:
                        stamp[w] = tok
                        queue[nxt] = w
                        nxt += 1
            start, end = end, nxt
            if start == end:
                break
        deg_sum = 0
        for qi in range(end):
            v = queue[qi]
            for e in range(indptr[v], indptr[v + 1]):
                if stamp[indices[e]] == tok:
                    deg_sum += 1
        sizes[ci] = end
        edges[ci] = deg_sum // 2


@njit(nogil=True, cache=True)
def _splitmix64(state):
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(nogil=True, cache=True)
def _dist_leq(adj, D, u, v, limit, skip_direct, epoch, stamp1, stamp2, q1, q2):
    """True iff dist(u, v) <= limit; with skip_direct the edge (u, v) is ignored.

    Meet-in-the-middle truncated BFS on the flat n*D adjacency; NO_EDGE slots
    are skipped. `epoch` must be fresh for every call.
    """
    if u == v:
        return True
    du = limit // 2
    dv = limit - du
    # forward BFS from u to depth du
    stamp1[u] = epoch
    q1[0] = u
    start, end = 0, 1
    for depth in range(du):
        nxt = end
        for qi in range(start, end):
            a = q1[qi]
            for s in range(a * D, (a + 1) * D):
                w = adj[s]
                if w < 0:
                    continue
                if skip_direct and depth == 0 and w == v:
                    continue
                if w == v:
                    return True
                if stamp1[w] != epoch:
                    stamp1[w] = epoch
                    q1[nxt] = w
                    nxt += 1
        start, end = end, nxt
        if start == end:
            break
    # backward BFS from v to depth dv, probing the forward ball
    stamp2[v] = epoch
    q2[0] = v
    start, end = 0, 1
    for depth in range(dv):
        nxt = end
        for qi in range(start, end):
            a = q2[qi]
            for s in range(a * D, (a + 1) * D):
                w = adj[s]
                if w < 0:
                    continue
                if skip_direct and depth == 0 and w == u:
                    continue
                if stamp1[w] == epoch:
                    return True
                if stamp2[w] != epoch:
                    stamp2[w] = epoch
                    q2[nxt] = w
                    nxt += 1
        start, end = end, nxt
        if start == end:
            break
    return False


@njit(nogil=True, cache=True)
def _find_slot(adj, D, a, b):
    for s in range(a * D, (a + 1) * D):
        if adj[s] == b:
            return s
    return -1


@njit(nogil=True, cache=True)
def _drop_edge(adj, D, a, b):
    adj[_find_slot(adj, D, a, b)] = NO_EDGE
    adj[_find_slot(adj, D, b, a)] = NO_EDGE


@njit(nogil=True, cache=True)
def _put_edge(adj, D, a, b):
    adj[_find_slot(adj, D, a, NO_EDGE)] = b
    adj[_find_slot(adj, D, b, NO_EDGE)] = a


@njit(nogil=True, cache=True)
def repair_girth(adj, n, D, girth_min, seed, max_partner_tries):
    """Remove every cycle shorter than girth_min by double-edge swaps.

    adj is the flat n*D adjacency of a simple D-regular graph, modified in
    place. Each edge found on a short cycle is re-wired against a random
    partner edge; replacement edges are only accepted when they provably
    create no short cycle, so the bad-edge count is monotone decreasing.
    Returns 1 on success, 0 if a partner search stalled (caller restarts).
    """
    limit = girth_min - 2  # an edge (u,v) is bad iff dist(u,v) <= limit without it
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    stamp1 = np.zeros(n, dtype=np.int64)
    stamp2 = np.zeros(n, dtype=np.int64)
    q1 = np.empty(n, dtype=np.int32)
    q2 = np.empty(n, dtype=np.int32)
    m = n * D // 2
    qu = np.empty(m, dtype=np.int32)
    qv = np.empty(m, dtype=np.int32)
    k = 0
    for a in range(n):
        for s in range(a * D, (a + 1) * D):
            b = adj[s]
            if b > a:
                qu[k] = a
                qv[k] = b
                k += 1
    epoch = np.int64(0)
    for qi in range(m):
        u = qu[qi]
        v = qv[qi]
        if _find_slot(adj, D, u, v) < 0:
            continue  # swapped away since it was queued
        epoch += 1
        if not _dist_leq(adj, D, u, v, limit, True, epoch, stamp1, stamp2, q1, q2):
            continue
        fixed = False
        for _t in range(max_partner_tries):
            r = _splitmix64(state)
            idx = np.int64(r % np.uint64(n * D))
            x = idx // D
            y = adj[idx]
            if y < 0 or x == u or x == v or y == u or y == v:
                continue
            _drop_edge(adj, D, u, v)
            _drop_edge(adj, D, x, y)
            epoch += 1
            if _dist_leq(adj, D, u, x, limit, False, epoch, stamp1, stamp2, q1, q2):
                _put_edge(adj, D, x, y)
                _put_edge(adj, D, u, v)
                continue
            _put_edge(adj, D, u, x)
            epoch += 1
            if _dist_leq(adj, D, v, y, limit, False, epoch, stamp1, stamp2, q1, q2):
                _drop_edge(adj, D, u, x)
                _put_edge(adj, D, x, y)
                _put_edge(adj, D, u, v)
                continue
            _put_edge(adj, D, v, y)
            fixed = True
            break
        if not fixed:
            return 0
    return 1


@njit(nogil=True, cache=True)
def brute_force_cut(eu, ev, n):
    """Exhaustive MAX-CUT over 2^(n-1) sign patterns with vertex 0 fixed.

    Returns (best cut edge count, winning mask); bit v of the mask is the
    side of vertex v. First optimum in mask order wins, for determinism.
    """
    m = eu.shape[0]
    best = np.int64(-1)
    best_mask = np.uint64(0)
    total = np.int64(1) << (n - 1)
    for s in range(total):
        mask = np.uint64(s) << np.uint64(1)
        cut = np.int64(0)
        for e in range(m):
            if ((mask >> np.uint64(eu[e])) ^ (mask >> np.uint64(ev[e]))) & np.uint64(1):
                cut += 1
        if cut > best:
            best = cut
            best_mask = mask
    return best, best_mask
