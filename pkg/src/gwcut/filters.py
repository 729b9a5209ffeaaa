"""The linear stage: Gaussian initial field and distance-shell filters."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._threads import run_split
from .graphs import Graph
from .seeds import rng_from

# Shell radius guardrail: per-vertex work grows like D**K.
DEFAULT_MAX_K = 6


@dataclass(frozen=True)
class CoefficientSchedule:
    """Weights a_0..a_K applied to the distance-k sums of the shell filter."""

    a: np.ndarray

    def __init__(self, a):
        arr = np.asarray(a, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("schedule must be a non-empty 1-d real sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("schedule coefficients must be finite")
        if not np.any(arr != 0.0):
            raise ValueError("schedule must have at least one nonzero coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)

    @property
    def K(self) -> int:
        return int(self.a.size - 1)

    def alternated(self) -> "CoefficientSchedule":
        """The schedule with a_k replaced by a_k * (-1)**k."""
        signs = np.where(np.arange(self.a.size) % 2 == 0, 1.0, -1.0)
        return CoefficientSchedule(self.a * signs)

    def tokens(self) -> str:
        return ",".join(repr(float(c)) for c in self.a)


def geometric_schedule(D: int, K: int) -> CoefficientSchedule:
    """a_k = (-1/sqrt(D))**k, unnormalised; sign rounding ignores scale."""
    if D < 3:
        raise ValueError("degree must be >= 3")
    if K < 1:
        raise ValueError("K must be >= 1")
    base = -1.0 / math.sqrt(D)
    return CoefficientSchedule([base ** k for k in range(K + 1)])


def parse_schedule(spec: str, D: int | None = None, K: int | None = None) -> CoefficientSchedule:
    """Parse 'geometric', 'geometric(D,K)', or an explicit '1,-0.5,0.25' list."""
    text = spec.strip()
    if text.startswith("geometric"):
        inner = text[len("geometric"):].strip()
        if inner.startswith("(") and inner.endswith(")"):
            d_s, k_s = inner[1:-1].split(",")
            return geometric_schedule(int(d_s), int(k_s))
        if inner:
            raise ValueError(f"cannot parse schedule {spec!r}")
        if D is None or K is None:
            raise ValueError("schedule 'geometric' needs D and K")
        return geometric_schedule(D, K)
    return CoefficientSchedule([float(tok) for tok in text.split(",")])


def init_gaussian(n: int, seed) -> np.ndarray:
    """i.i.d. standard normal field, one value per vertex.

    Counter-based (Philox) generation makes the draw prefix-stable: the first
    m values for a given seed are independent of n.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    return rng_from(seed).standard_normal(n)


def _check_field(g: Graph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"field has {x.shape} values for a graph on {g.n} vertices")
    if not np.all(np.isfinite(x)):
        raise ValueError("field values must be finite")
    return x


def multi_shell_update(g: Graph, x: np.ndarray, schedule: CoefficientSchedule,
                       threads: int | None = None, max_k: int = DEFAULT_MAX_K) -> np.ndarray:
    """x'_u = sum_k a_k * sum_{dist(u,v)=k} x_v, all from pre-update values.

    Shells are discovered per vertex by truncated BFS, O(n * D**K) total;
    K above `max_k` is refused. Output is bitwise identical for any thread
    count (per-vertex summation order is fixed by the BFS).
    """
    x = _check_field(g, x)
    if schedule.K > max_k:
        raise ValueError(f"schedule radius K={schedule.K} exceeds the cap {max_k}")
    out = np.empty(g.n)
    coeffs = schedule.a

    def worker(lo, hi):
        stamp = np.zeros(g.n, dtype=np.int32)
        queue = np.empty(g.n, dtype=np.int32)
        _kernels.shell_filter_range(g.indptr, g.indices, x, coeffs, out, lo, hi, stamp, queue)

    run_split(worker, g.n, threads)
    return out


def one_step_update(g: Graph, x: np.ndarray, a: float, threads: int | None = None) -> np.ndarray:
    """x'_u = x_u + a * sum_{v ~ u} x_v; the K=1 shell filter with a_0 = 1."""
    return multi_shell_update(g, x, CoefficientSchedule([1.0, float(a)]), threads=threads)


def tanh_dynamics(g: Graph, x: np.ndarray, rounds, threads: int | None = None) -> np.ndarray:
    """Iterated linear mix + tanh squashing.

    Each round (c_self, c_nbr, beta) maps x to tanh(beta * y) with
    y_u = c_self * x_u + c_nbr * sum_{v ~ u} x_v computed from the pre-round
    field; beta = 0 keeps y unsquashed so the linear regime is exact.
    """
    rounds = list(rounds)
    if not rounds:
        raise ValueError("need at least one round")
    x = _check_field(g, x)
    for c_self, c_nbr, beta in rounds:
        if beta < 0:
            raise ValueError("beta must be >= 0")
        y = multi_shell_update(g, x, CoefficientSchedule([float(c_self), float(c_nbr)]),
                               threads=threads)
        x = np.tanh(beta * y) if beta > 0 else y
    return x
