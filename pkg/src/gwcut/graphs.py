"""Regular graphs, tree fixtures, distance shells, and girth.

Graphs are immutable once built: dense integer vertex ids, a canonical
(min, max)-ordered edge list stored once, and a CSR adjacency for queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from . import _kernels
from ._threads import run_split
from .seeds import rng_from, state_from

ACYCLIC = "acyclic"

_PARTNER_TRIES = 400


class GraphGenerationError(RuntimeError):
    """generate_regular exhausted its attempt budget."""


class GraphFormatError(ValueError):
    """A graph file violated the edge-list format."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with flattened symmetric adjacency."""

    n: int
    edges: np.ndarray  # (m, 2) int32, u < v, lexicographically sorted
    indptr: np.ndarray  # int64[n+1] CSR offsets
    indices: np.ndarray  # int32[2m] neighbor ids, ascending per row
    degree_hint: int | None = None  # common degree when regular, else None

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr).astype(np.int64)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    @cached_property
    def girth_cache(self) -> int | str:
        return _compute_girth(self)


def from_edge_array(n: int, edge_array, degree_hint: int | None = None) -> Graph:
    """Build a Graph from an (m, 2) array-like of endpoint pairs."""
    e = np.asarray(edge_array, dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoint out of range")
    u = np.minimum(e[:, 0], e[:, 1])
    v = np.maximum(e[:, 0], e[:, 1])
    if np.any(u == v):
        raise ValueError("self-loops are not allowed")
    codes = u * n + v
    order = np.argsort(codes, kind="stable")
    codes = codes[order]
    if codes.size > 1 and np.any(codes[1:] == codes[:-1]):
        raise ValueError("duplicate edges are not allowed")
    edges = np.column_stack([u[order], v[order]]).astype(np.int32)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    half_order = np.lexsort((dst, src))
    indices = np.ascontiguousarray(dst[half_order], dtype=np.int32)
    counts = np.bincount(src, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    for arr in (edges, indices, indptr):
        arr.setflags(write=False)
    return Graph(n=n, edges=edges, indptr=indptr, indices=indices, degree_hint=degree_hint)


# ---------------------------------------------------------------------------
# random regular generation (pairing model + girth repair)
# ---------------------------------------------------------------------------

def _merge_sorted(base: np.ndarray, add: np.ndarray) -> np.ndarray:
    if base.size == 0:
        return add
    return np.insert(base, np.searchsorted(base, add), add)


def _member(sorted_codes: np.ndarray, codes: np.ndarray) -> np.ndarray:
    if sorted_codes.size == 0:
        return np.zeros(codes.shape, dtype=bool)
    pos = np.searchsorted(sorted_codes, codes)
    pos_c = np.minimum(pos, sorted_codes.size - 1)
    return (pos < sorted_codes.size) & (sorted_codes[pos_c] == codes)


def _resolve_leftovers(existing: np.ndarray, pool: np.ndarray, n: int, D: int,
                       rng: np.random.Generator) -> np.ndarray | None:
    """Wire up stub pairs that cannot be matched directly.

    A leftover pair (u, v) is a forced self-loop or duplicate; splitting a
    random existing edge (x, y) into (u, x) and (v, y) fixes it while
    preserving all degrees.
    """
    pool = rng.permutation(pool)
    for i in range(0, pool.size, 2):
        u, v = int(pool[i]), int(pool[i + 1])
        code = min(u, v) * n + max(u, v)
        if u != v and not _member(existing, np.array([code]))[0]:
            existing = _merge_sorted(existing, np.array([code], dtype=np.int64))
            continue
        for _ in range(_PARTNER_TRIES):
            k = int(rng.integers(existing.size))
            x, y = divmod(int(existing[k]), n)
            if int(rng.integers(2)):
                x, y = y, x
            if x in (u, v) or y in (u, v):
                continue
            c1 = min(u, x) * n + max(u, x)
            c2 = min(v, y) * n + max(v, y)
            if c1 == c2 or _member(existing, np.array([c1, c2])).any():
                continue
            existing = np.delete(existing, np.searchsorted(existing, existing[k]))
            existing = _merge_sorted(existing, np.sort(np.array([c1, c2], dtype=np.int64)))
            break
        else:
            return None
    return existing


def _pair_stubs(n: int, D: int, rng: np.random.Generator, max_rounds: int = 500) -> np.ndarray | None:
    """One pairing-model attempt; returns sorted edge codes u*n+v or None."""
    pool = np.repeat(np.arange(n, dtype=np.int64), D)
    existing = np.empty(0, dtype=np.int64)
    zero_rounds = 0
    for _ in range(max_rounds):
        if pool.size == 0:
            return existing
        pool = rng.permutation(pool)
        a, b = pool[0::2], pool[1::2]
        u, v = np.minimum(a, b), np.maximum(a, b)
        codes = u * n + v
        ok = u != v
        first = np.zeros(codes.size, dtype=bool)
        first[np.unique(codes, return_index=True)[1]] = True
        ok &= first
        ok &= ~_member(existing, codes)
        accepted = codes[ok]
        if accepted.size:
            zero_rounds = 0
            existing = _merge_sorted(existing, np.sort(accepted))
        else:
            zero_rounds += 1
            if pool.size <= 4 * D or zero_rounds >= 8:
                return _resolve_leftovers(existing, pool, n, D, rng)
        pool = np.concatenate([a[~ok], b[~ok]])
    return None


def _flat_adjacency(n: int, codes: np.ndarray) -> np.ndarray:
    u = (codes // n).astype(np.int32)
    v = (codes % n).astype(np.int32)
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.argsort(src, kind="stable")
    return np.ascontiguousarray(dst[order])


def _codes_from_flat(adj: np.ndarray, n: int, D: int) -> np.ndarray:
    mat = adj.reshape(n, D).astype(np.int64)
    rows = np.repeat(np.arange(n, dtype=np.int64), D)
    cols = mat.ravel()
    keep = cols > rows
    return np.sort(rows[keep] * n + cols[keep])


def _scan_shortest_cycle(indptr: np.ndarray, indices: np.ndarray, bound: int,
                         threads: int | None = None) -> int:
    """min(bound, girth); bound acts as a cutoff for the per-root BFS depth."""
    n = indptr.shape[0] - 1
    results: dict[int, int] = {}

    def worker(lo, hi):
        stamp = np.zeros(n, dtype=np.int32)
        dist = np.empty(n, dtype=np.int32)
        parent = np.empty(n, dtype=np.int32)
        queue = np.empty(n, dtype=np.int32)
        results[lo] = _kernels.girth_scan_range(
            indptr, indices, lo, hi, bound, stamp, dist, parent, queue)

    run_split(worker, n, threads)
    return min(results.values(), default=bound)


def generate_regular(n: int, D: int, seed, min_girth: int = 3,
                     max_attempts: int = 64) -> Graph:
    """Random simple D-regular graph on n vertices with girth >= min_girth.

    Pairing-model sampling; forced self-loops/duplicates in the endgame are
    resolved by degree-preserving edge splits, and graphs below min_girth are
    repaired by validated double-edge swaps. Deterministic in
    (n, D, seed, min_girth); the attempt counter derives fresh streams.
    """
    if D < 3:
        raise ValueError("degree must be >= 3 (D = 2 is degenerate)")
    if n <= D:
        raise ValueError("need n > D")
    if (n * D) % 2 != 0:
        raise ValueError("n * D must be even (parity violation)")
    if min_girth < 3:
        raise ValueError("min_girth must be >= 3")
    for attempt in range(max_attempts):
        rng = rng_from((seed, attempt))
        codes = _pair_stubs(n, D, rng)
        if codes is None or codes.size != n * D // 2:
            continue
        if min_girth > 3:
            adj = _flat_adjacency(n, codes)
            ok = _kernels.repair_girth(adj, n, D, min_girth,
                                       np.uint64(state_from((seed, attempt, 1))),
                                       _PARTNER_TRIES)
            if not ok:
                continue
            codes = _codes_from_flat(adj, n, D)
            g = from_edge_array(n, np.column_stack([codes // n, codes % n]), degree_hint=D)
            if _scan_shortest_cycle(g.indptr, g.indices, min_girth) < min_girth:
                continue  # defensive; the repair verifies every edge it touches
            return g
        return from_edge_array(n, np.column_stack([codes // n, codes % n]), degree_hint=D)
    raise GraphGenerationError(
        f"no simple {D}-regular graph with girth >= {min_girth} on {n} vertices "
        f"after {max_attempts} attempts")


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def _compute_girth(g: Graph) -> int | str:
    if g.m == 0:
        return ACYCLIC
    ncomp = _kernels.count_components(g.indptr, g.indices)
    if g.m == g.n - ncomp:
        return ACYCLIC
    bound = g.n + 1
    return int(_scan_shortest_cycle(g.indptr, g.indices, bound))


def girth(g: Graph) -> int | str:
    """Length of the shortest cycle, or "acyclic" for forests."""
    return g.girth_cache


def girth_at_least(g: Graph, k: int, threads: int | None = None) -> bool:
    """girth(g) >= k, computed with BFS truncated at depth ~k/2."""
    if "girth_cache" in g.__dict__:
        cached = g.girth_cache
        return cached == ACYCLIC or cached >= k
    if g.m == 0:
        return True
    return _scan_shortest_cycle(g.indptr, g.indices, k, threads) >= k


@dataclass(frozen=True)
class DistanceShells:
    """Vertices grouped by exact graph distance from a centre."""

    center: int
    K: int
    shells: tuple[np.ndarray, ...]  # shells[k] sorted ascending; may be empty

    def ball_size(self) -> int:
        return int(sum(s.size for s in self.shells))


def shells(g: Graph, u: int, K: int) -> DistanceShells:
    """BFS truncated at depth K; shells[k] holds vertices at distance exactly k."""
    if not (0 <= u < g.n):
        raise ValueError("center out of range")
    if K < 0:
        raise ValueError("K must be >= 0")
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[u] = 0
    levels = [[u]]
    frontier = [u]
    for _k in range(K):
        nxt = []
        for v in frontier:
            for w in g.neighbors(v):
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    nxt.append(int(w))
        levels.append(nxt)
        frontier = nxt
    return DistanceShells(center=u, K=K,
                          shells=tuple(np.array(sorted(lv), dtype=np.int64) for lv in levels))


def tree_ball_size(D: int, r: int) -> int:
    """Vertices within distance r of a vertex in the infinite D-regular tree."""
    if D < 3:
        raise ValueError("degree must be >= 3")
    return 1 + D * ((D - 1) ** r - 1) // (D - 2)


def ball_stats(g: Graph, centers, r: int, threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(|ball(u, r)|, induced edge count of the ball) for each centre."""
    centers = np.asarray(centers, dtype=np.int64)
    sizes = np.empty(centers.size, dtype=np.int64)
    edges = np.empty(centers.size, dtype=np.int64)

    def worker(lo, hi):
        stamp = np.zeros(g.n, dtype=np.int32)
        queue = np.empty(g.n, dtype=np.int32)
        _kernels.ball_stats_range(g.indptr, g.indices, centers, r, sizes, edges,
                                  lo, hi, stamp, queue)

    run_split(worker, centers.size, threads)
    return sizes, edges


def is_locally_tree_like(g: Graph, u: int, r: int, degree: int | None = None) -> bool:
    """True iff ball(u, r) has the exact tree-ball size and induces no cycle.

    The induced-edge check matters: on a triangle, |ball(u, 1)| matches the
    tree count while the ball is not a tree.
    """
    D = g.degree_hint if degree is None else degree
    if D is None:
        raise ValueError("degree unknown; pass degree= explicitly")
    sizes, edges = ball_stats(g, [u], r)
    return int(sizes[0]) == tree_ball_size(D, r) and int(edges[0]) == int(sizes[0]) - 1


def tree_like_fraction(g: Graph, centers, r: int, degree: int | None = None,
                       threads: int | None = None) -> float:
    """Fraction of the given centres whose r-ball is an exact tree ball."""
    D = g.degree_hint if degree is None else degree
    if D is None:
        raise ValueError("degree unknown; pass degree= explicitly")
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        return float("nan")
    sizes, edges = ball_stats(g, centers, r, threads)
    good = (sizes == tree_ball_size(D, r)) & (edges == sizes - 1)
    return float(np.mean(good))


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def build_tree(D: int, depth: int) -> Graph:
    """Finite D-regular tree: root has D children, internal vertices D-1.

    Leaves sit exactly at distance `depth`; every non-leaf has total degree D.
    """
    if D < 3:
        raise ValueError("degree must be >= 3")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    shell_sizes = [1] + [D * (D - 1) ** (k - 1) for k in range(1, depth + 1)]
    starts = np.concatenate([[0], np.cumsum(shell_sizes)])
    edges = []
    for k in range(1, depth + 1):
        parents = np.arange(starts[k - 1], starts[k], dtype=np.int64)
        fanout = D if k == 1 else D - 1
        children = np.arange(starts[k], starts[k + 1], dtype=np.int64)
        edges.append(np.column_stack([np.repeat(parents, fanout), children]))
    return from_edge_array(int(starts[-1]), np.vstack(edges), degree_hint=None)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    i = np.arange(n, dtype=np.int64)
    return from_edge_array(n, np.column_stack([i, (i + 1) % n]), degree_hint=2)


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    return from_edge_array(n, list(combinations(range(n), 2)), degree_hint=n - 1)


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edge_array(10, outer + spokes + inner, degree_hint=3)


# ---------------------------------------------------------------------------
# plain-text edge-list I/O: "n D" header, one "u v" line per edge, ascending
# ---------------------------------------------------------------------------

def save_graph(g: Graph, path) -> None:
    lines = [f"{g.n} {g.degree_hint or 0}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph(path) -> Graph:
    def fail(lineno, msg):
        raise GraphFormatError(f"{path}:{lineno}: {msg}")

    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise GraphFormatError(f"{path}:1: empty file")
    head = raw[0].split()
    if len(head) != 2:
        fail(1, "header must be 'n D'")
    try:
        n, D = int(head[0]), int(head[1])
    except ValueError:
        fail(1, "header must contain two integers")
    if n <= 0 or D < 0:
        fail(1, "header values out of range")
    edges = np.empty((len(raw) - 1, 2), dtype=np.int64)
    prev_code = -1
    for i, line in enumerate(raw[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            fail(i, "expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            fail(i, "endpoints must be integers")
        if not (0 <= u < n and 0 <= v < n):
            fail(i, "endpoint out of range")
        if u >= v:
            fail(i, "edges must be listed as 'u v' with u < v")
        code = u * n + v
        if code == prev_code:
            fail(i, "duplicate edge")
        if code < prev_code:
            fail(i, "edges must be in ascending canonical order")
        prev_code = code
        edges[i - 2] = (u, v)
    g = from_edge_array(n, edges, degree_hint=D if D > 0 else None)
    if D > 0 and not np.all(g.degrees() == D):
        raise GraphFormatError(f"{path}: graph is not {D}-regular as the header claims")
    return g


def neighbor_sums(g: Graph, values: np.ndarray) -> np.ndarray:
    """sum_{v ~ u} values[v] for every u (exact for integer-valued input)."""
    if g.m == 0:
        return np.zeros(g.n)
    eu = g.edges[:, 0]
    ev = g.edges[:, 1]
    vals = np.asarray(values, dtype=np.float64)
    return (np.bincount(eu, weights=vals[ev], minlength=g.n)
            + np.bincount(ev, weights=vals[eu], minlength=g.n))
