"""Independent ground truths used to validate the other modules.

The Monte Carlo estimators and the dense per-vertex filter here deliberately
avoid the package's compiled BFS kernels so that differential tests compare
two genuinely separate computations.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from . import _kernels
from .filters import CoefficientSchedule
from .graphs import Graph, build_tree
from .seeds import rng_from

BRUTE_FORCE_MAX_N = 24
DENSE_FILTER_MAX_N = 500


def brute_force_max_cut(g: Graph) -> tuple[float, np.ndarray]:
    """Exhaustive optimum over all 2^(n-1) sign patterns (vertex 0 fixed +1).

    Returns (max cut fraction, one witness partition).
    """
    if g.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force capped at n <= {BRUTE_FORCE_MAX_N}")
    if g.m == 0:
        raise ValueError("graph has no edges")
    eu = g.edges[:, 0].astype(np.int64)
    ev = g.edges[:, 1].astype(np.int64)
    best, mask = _kernels.brute_force_cut(eu, ev, g.n)
    bits = (int(mask) >> np.arange(g.n)) & 1
    witness = np.where(bits == 1, -1, 1).astype(np.int8)
    return float(best) / g.m, witness


def mc_bivariate_sign_correlation(rho: float, samples: int, seed) -> tuple[float, float]:
    """Monte Carlo E[sign(X) sign(Y)] at correlation rho, with its stderr."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = rng_from(seed)
    x = rng.standard_normal(samples)
    z = rng.standard_normal(samples)
    y = rho * x + np.sqrt(1.0 - rho * rho) * z
    prod = np.where(x < 0, -1.0, 1.0) * np.where(y < 0, -1.0, 1.0)
    est = float(prod.mean())
    stderr = float(prod.std(ddof=1) / np.sqrt(samples))
    return est, stderr


def _bfs_distances_upto(g: Graph, source: int, radius: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for w in g.neighbors(v):
            w = int(w)
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def tree_mc_correlation(D: int, schedule: CoefficientSchedule, d: int, trials: int,
                        seed, batch: int = 1024) -> tuple[float, float]:
    """Sampled filtered-value correlation at tree distance d, with stderr.

    Builds a finite tree deep enough that both endpoints' K-balls avoid the
    leaves, draws fresh Gaussians on the union of the balls per trial, and
    estimates rho as mean(y_u * y_v) / mean((y_u^2 + y_v^2)/2), with a
    linearised (delta-method) standard error.
    """
    K = schedule.K
    if d < 0:
        raise ValueError("distance must be >= 0")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    depth = K + d + 1
    if (D - 1) ** depth > 3_000_000:
        raise ValueError(f"tree of degree {D} and depth {depth} is too large")
    tree = build_tree(D, depth)
    u = 0
    v = u
    for _ in range(d):  # descend to first children: ids ascend with depth
        v = int(tree.neighbors(v)[0]) if v == 0 else int(tree.neighbors(v)[1])
    dist_u = _bfs_distances_upto(tree, u, K)
    dist_v = _bfs_distances_upto(tree, v, K)
    ball = sorted(set(dist_u) | set(dist_v))
    a = schedule.a
    w_u = np.array([a[dist_u[w]] if w in dist_u else 0.0 for w in ball])
    w_v = np.array([a[dist_v[w]] if w in dist_v else 0.0 for w in ball])
    rng = rng_from(seed)
    p = np.empty(trials)
    q = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        x = rng.standard_normal((b, len(ball)))
        yu = x @ w_u
        yv = x @ w_v
        p[done:done + b] = yu * yv
        q[done:done + b] = 0.5 * (yu * yu + yv * yv)
        done += b
    q_mean = float(q.mean())
    rho_hat = float(p.mean()) / q_mean
    resid = p - rho_hat * q
    stderr = float(np.sqrt(resid.var(ddof=1) / trials) / q_mean)
    return rho_hat, stderr


def dense_ball_filter(g: Graph, x: np.ndarray, schedule: CoefficientSchedule, u: int) -> float:
    """Shell filter value at a single vertex via explicit distance computation.

    Pure-Python BFS re-implementation used as a differential-testing oracle
    for multi_shell_update; capped at small graphs.
    """
    if g.n > DENSE_FILTER_MAX_N:
        raise ValueError(f"dense oracle capped at n <= {DENSE_FILTER_MAX_N}")
    x = np.asarray(x, dtype=np.float64)
    dist = _bfs_distances_upto(g, u, schedule.K)
    shells: dict[int, list[int]] = {}
    for w, dw in dist.items():
        shells.setdefault(dw, []).append(w)
    total = 0.0
    for k in range(schedule.K + 1):
        members = sorted(shells.get(k, []))
        total += float(schedule.a[k]) * sum(float(x[w]) for w in members)
    return total
