"""Closed-form predictions on the infinite D-regular tree.

The filtered values at two vertices u, v with dist(u, v) = d are jointly
Gaussian; their covariance is a finite sum over tree vertices w of
a_dist(u,w) * a_dist(v,w). Grouping the w by (nearest path vertex, offset)
makes that an exact integer-weighted convolution, evaluated here without
any sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .filters import CoefficientSchedule

TWO_OVER_PI = 2.0 / math.pi
PARISI_C = 0.763


@dataclass(frozen=True)
class TreeCorrelation:
    """Normalised correlation of filtered values at tree distance d."""

    rho: float
    covariance: float
    variance: float


def tree_shell_count(D: int, k: int) -> int:
    """N_k: vertices at distance exactly k in the infinite D-regular tree."""
    if k == 0:
        return 1
    return D * (D - 1) ** (k - 1)


def exact_tree_correlation(D: int, schedule: CoefficientSchedule, d: int) -> TreeCorrelation:
    """E[x'_u x'_v] / E[x'_u^2] for endpoints at tree distance d, exactly.

    Every tree vertex w projects onto the u-v path at a unique nearest vertex
    p_m (m edges from u) at some offset t >= 0; there are exactly one such w
    at t = 0 and b_m * (D-1)**(t-1) at t >= 1, where b_m = D-1 at the path
    endpoints and D-2 strictly inside. Each contributes
    a_{m+t} * a_{d-m+t} when both indices are within the schedule radius.
    """
    if D < 3:
        raise ValueError("degree must be >= 3")
    if d < 0:
        raise ValueError("distance must be >= 0")
    a = schedule.a
    K = schedule.K
    variance = sum(float(a[k]) ** 2 * tree_shell_count(D, k) for k in range(K + 1))
    if d == 0:
        return TreeCorrelation(rho=1.0, covariance=variance, variance=variance)
    cov = 0.0
    for m in range(d + 1):
        branch = D - 1 if m in (0, d) else D - 2
        for t in range(K + 1):
            i, j = m + t, d - m + t
            if i > K or j > K:
                break
            count = 1 if t == 0 else branch * (D - 1) ** (t - 1)
            cov += count * float(a[i]) * float(a[j])
    return TreeCorrelation(rho=cov / variance, covariance=cov, variance=variance)


def sheppard(rho: float) -> float:
    """E[sign(X) sign(Y)] for standard bivariate normals with correlation rho."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("correlation must lie in [-1, 1]")
    return TWO_OVER_PI * math.asin(rho)


def predicted_cut_fraction(rho: float) -> float:
    """Expected cut fraction when edge endpoints round signs at correlation rho."""
    return 0.5 - 0.5 * sheppard(rho)


def asymptotic_rho(D: int, K: int) -> float:
    """Leading-order edge correlation -(2/sqrt(D)) * (K-1)/K of the geometric schedule."""
    if D < 3:
        raise ValueError("degree must be >= 3")
    if K < 2:
        raise ValueError("the leading-order ratio needs K >= 2")
    return -(2.0 / math.sqrt(D)) * (K - 1) / K


def scaled_constant(cut_fraction: float, D: int) -> float:
    """C in cut fraction = 1/2 + C/sqrt(D)."""
    return (cut_fraction - 0.5) * math.sqrt(D)


def reference_constants() -> dict[str, float]:
    """Benchmarks for reporting: the provable 2/pi and the Parisi value."""
    return {"two_over_pi": TWO_OVER_PI, "parisi": PARISI_C}
