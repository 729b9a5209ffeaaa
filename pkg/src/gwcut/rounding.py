"""Sign rounding, random marking, and the one-round greedy/threshold flips."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, neighbor_sums
from .seeds import rng_from

MARK_MODES = ("bernoulli", "exact")


@dataclass(frozen=True)
class MarkSet:
    """Vertices eligible for the greedy flip, with the nominal fraction."""

    marked: np.ndarray  # sorted unique vertex ids, int64
    epsilon: float

    def __init__(self, marked, epsilon):
        ids = np.unique(np.asarray(marked, dtype=np.int64))
        ids.setflags(write=False)
        object.__setattr__(self, "marked", ids)
        object.__setattr__(self, "epsilon", float(epsilon))

    @property
    def size(self) -> int:
        return int(self.marked.size)

    def mask(self, n: int) -> np.ndarray:
        if self.marked.size and (self.marked[0] < 0 or self.marked[-1] >= n):
            raise ValueError("marked vertex id out of range")
        m = np.zeros(n, dtype=bool)
        m[self.marked] = True
        return m


def round_signs(x: np.ndarray) -> np.ndarray:
    """Partition p_u = sign(x_u), with the measure-zero tie x_u = 0 sent to +1."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("field values must be finite")
    return np.where(x < 0, -1, 1).astype(np.int8)


def _check_partition(g: Graph, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p)
    if p.shape != (g.n,):
        raise ValueError(f"partition has {p.shape} entries for a graph on {g.n} vertices")
    if not np.all(np.abs(p) == 1):
        raise ValueError("partition entries must be +1 or -1")
    return p.astype(np.int8)


def mark_vertices(n: int, epsilon: float, seed, mode: str = "bernoulli") -> MarkSet:
    """Random epsilon-fraction of vertices; deterministic given the seed.

    bernoulli: each vertex independently with probability epsilon.
    exact: a uniform subset of size round(epsilon * n).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if mode not in MARK_MODES:
        raise ValueError(f"mode must be one of {MARK_MODES}")
    rng = rng_from(seed)
    if mode == "bernoulli":
        ids = np.flatnonzero(rng.random(n) < epsilon)
    else:
        size = int(round(epsilon * n))
        ids = rng.choice(n, size=size, replace=False)
    return MarkSet(ids, epsilon)


def greedy_flip(g: Graph, x_rounded: np.ndarray, marks: MarkSet) -> np.ndarray:
    """One simultaneous greedy round over the marked vertices.

    Every marked u takes minus the majority sign of its neighbours' pre-flip
    values; a tied majority keeps x_rounded[u]. Unmarked vertices pass
    through. All decisions read x_rounded, never post-flip values.
    """
    p = _check_partition(g, x_rounded)
    if marks.size == 0:
        return p.copy()
    s = neighbor_sums(g, p)
    flipped = np.where(s > 0, -1, np.where(s < 0, 1, p)).astype(np.int8)
    out = p.copy()
    mask = marks.mask(g.n)
    out[mask] = flipped[mask]
    return out


def threshold_flip(g: Graph, p: np.ndarray, marks: MarkSet, tau: float,
                   degree: int | None = None) -> np.ndarray:
    """Flip marked u iff at least D/2 + tau*sqrt(D) neighbours share its part.

    tau = +inf is the 'never flip' sentinel. Reads pre-flip parts only.
    """
    D = g.degree_hint if degree is None else degree
    if D is None:
        raise ValueError("degree unknown; pass degree= explicitly")
    p = _check_partition(g, p)
    if marks.size == 0:
        return p.copy()
    s = neighbor_sums(g, p)
    agreeing = (D + p * s) / 2.0
    flip = agreeing >= D / 2.0 + tau * math.sqrt(D)
    out = p.copy()
    mask = marks.mask(g.n) & flip
    out[mask] = -p[mask]
    return out
