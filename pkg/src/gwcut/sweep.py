"""Parameter sweeps and numerical optimisation of schedule and epsilon.

The schedule optimiser works against the exact tree correlation (noise-free
objective); only epsilon is tuned against Monte Carlo estimates. Cells that
differ only in epsilon share graphs and filter stages, which changes nothing
in any cell's output (the mark stream is epsilon-free) but divides the
dominant cost by the grid width.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import (EstimateSummary, ExperimentResult, RunConfig,
                        run_experiment_multi)
from .filters import CoefficientSchedule, geometric_schedule, parse_schedule
from .graphs import GraphGenerationError, tree_ball_size
from .seeds import state_from
from .theory import exact_tree_correlation, reference_constants

DEFAULT_BUDGET_CAP = 1.0e12
SCHEDULE_FAMILIES = ("geometric", "explicit", "optimized")
OPTIMIZE_MAX_K = 16


class BudgetExceededError(RuntimeError):
    """Estimated sweep work exceeds the configured cap; nothing was run."""


@dataclass(frozen=True)
class SweepSpec:
    d_grid: tuple[int, ...]
    k_grid: tuple[int, ...]
    eps_grid: tuple[float, ...]
    n: int
    trials: int
    master_seed: int
    schedule_family: str = "geometric"
    explicit_schedule: str | None = None
    variant: str = "greedy"
    mark_mode: str = "bernoulli"
    min_girth: int = 3
    budget_cap: float = DEFAULT_BUDGET_CAP

    def __post_init__(self):
        for name in ("d_grid", "k_grid", "eps_grid"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be non-empty")
        object.__setattr__(self, "d_grid", tuple(int(v) for v in self.d_grid))
        object.__setattr__(self, "k_grid", tuple(int(v) for v in self.k_grid))
        object.__setattr__(self, "eps_grid", tuple(float(v) for v in self.eps_grid))
        if self.schedule_family not in SCHEDULE_FAMILIES:
            raise ValueError(f"schedule_family must be one of {SCHEDULE_FAMILIES}")
        if self.schedule_family == "explicit" and not self.explicit_schedule:
            raise ValueError("explicit schedule family needs explicit_schedule")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "d_grid": list(self.d_grid), "k_grid": list(self.k_grid),
            "eps_grid": list(self.eps_grid), "n": self.n, "trials": self.trials,
            "master_seed": self.master_seed, "schedule_family": self.schedule_family,
            "explicit_schedule": self.explicit_schedule, "variant": self.variant,
            "mark_mode": self.mark_mode, "min_girth": self.min_girth,
            "budget_cap": self.budget_cap,
        }


def estimate_cell_cost(n: int, D: int, K: int, trials: int) -> float:
    """Filter-stage probe count: trials * n * (edges incident to the (K-1)-ball)."""
    per_center = min(tree_ball_size(D, max(K - 1, 0)), n) * D
    return float(trials) * n * per_center


@dataclass(frozen=True)
class SweepRow:
    D: int
    K: int
    epsilon: float
    n: int
    trials: int
    schedule: str
    error: str | None
    c_mean: float
    c_stderr: float
    cut_mean: float
    cut_stderr: float
    edge_corr_mean: float
    flips_mean: float
    class_both_unmarked: float
    class_one_marked: float
    class_both_marked: float
    tree_like_mean: float


@dataclass(frozen=True)
class SweepReport:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]
    best_index: int | None  # argmax of c_mean among successful rows

    def best(self) -> SweepRow | None:
        return None if self.best_index is None else self.rows[self.best_index]


def _row_from_summary(D, K, eps, spec, schedule_tokens, summary: EstimateSummary) -> SweepRow:
    met = summary.metrics
    return SweepRow(
        D=D, K=K, epsilon=eps, n=spec.n, trials=summary.trials,
        schedule=schedule_tokens, error=None,
        c_mean=met["scaled_constant"].mean, c_stderr=met["scaled_constant"].stderr,
        cut_mean=met["cut_fraction"].mean, cut_stderr=met["cut_fraction"].stderr,
        edge_corr_mean=met["edge_correlation"].mean, flips_mean=met["flips"].mean,
        class_both_unmarked=met["class_both_unmarked"].mean,
        class_one_marked=met["class_one_marked"].mean,
        class_both_marked=met["class_both_marked"].mean,
        tree_like_mean=met["tree_like_fraction"].mean,
    )


def _error_row(D, K, eps, spec, schedule_tokens, msg) -> SweepRow:
    nan = math.nan
    return SweepRow(D=D, K=K, epsilon=eps, n=spec.n, trials=0, schedule=schedule_tokens,
                    error=msg, c_mean=nan, c_stderr=nan, cut_mean=nan, cut_stderr=nan,
                    edge_corr_mean=nan, flips_mean=nan, class_both_unmarked=nan,
                    class_one_marked=nan, class_both_marked=nan, tree_like_mean=nan)


def _cell_schedule(spec: SweepSpec, D: int, K: int) -> CoefficientSchedule:
    if spec.schedule_family == "geometric":
        return geometric_schedule(D, K)
    if spec.schedule_family == "explicit":
        return parse_schedule(spec.explicit_schedule)
    return optimize_schedule(D, K)


def cell_config(spec: SweepSpec, D: int, K: int, epsilon: float) -> RunConfig:
    """The standalone RunConfig whose run_experiment output equals this cell's row."""
    schedule = _cell_schedule(spec, D, K)
    return RunConfig(
        n=spec.n, D=D, trials=spec.trials,
        master_seed=state_from((spec.master_seed, D, K)),
        schedule=schedule.tokens(), K=schedule.K, epsilon=epsilon,
        mark_mode=spec.mark_mode, variant=spec.variant, min_girth=spec.min_girth)


def grid_sweep(spec: SweepSpec, workers: int = 1) -> SweepReport:
    """Run every (D, K, epsilon) cell; failed cells are recorded, not fatal."""
    total = sum(estimate_cell_cost(spec.n, D, K, spec.trials)
                for D in spec.d_grid for K in spec.k_grid)
    if total > spec.budget_cap:
        raise BudgetExceededError(
            f"estimated work {total:.3g} exceeds budget cap {spec.budget_cap:.3g}")
    cells: dict[tuple[int, int, float], SweepRow] = {}
    for D in spec.d_grid:
        for K in spec.k_grid:
            try:
                schedule = _cell_schedule(spec, D, K)
                tokens = schedule.tokens()
                cfg = cell_config(spec, D, K, spec.eps_grid[0])
                per_eps = run_experiment_multi(cfg, spec.eps_grid, workers=workers)
            except (GraphGenerationError, ValueError) as exc:
                for eps in spec.eps_grid:
                    tokens = spec.explicit_schedule or "geometric"
                    cells[(D, K, eps)] = _error_row(D, K, eps, spec, tokens, str(exc))
                continue
            for eps in spec.eps_grid:
                cells[(D, K, eps)] = _row_from_summary(D, K, eps, spec, tokens,
                                                       per_eps[eps].summary)
    rows = tuple(cells[(D, K, eps)]
                 for D in spec.d_grid for K in spec.k_grid for eps in spec.eps_grid)
    best_index = None
    best_val = -math.inf
    for i, row in enumerate(rows):
        if row.error is None and not math.isnan(row.c_mean) and row.c_mean > best_val:
            best_val = row.c_mean
            best_index = i
    return SweepReport(spec=spec, rows=rows, best_index=best_index)


# ---------------------------------------------------------------------------
# epsilon optimisation: quadratic fit of C(epsilon)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticFit:
    """values ~ c0 + c1 * eps + c2 * eps**2 (least squares)."""

    c0: float
    c1: float
    c2: float
    vertex: float
    residuals: tuple[float, ...]
    degenerate: bool  # non-negative curvature: vertex is the grid argmax


def fit_epsilon_quadratic(eps, values) -> QuadraticFit:
    eps = np.asarray(eps, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if eps.size < 3:
        raise ValueError("need at least 3 grid points for a quadratic fit")
    c2, c1, c0 = np.polyfit(eps, values, 2)
    fitted = c0 + c1 * eps + c2 * eps * eps
    residuals = tuple(float(r) for r in values - fitted)
    hi = float(eps.max())
    if c2 < 0:
        vertex = float(min(max(-c1 / (2.0 * c2), 0.0), hi))
        return QuadraticFit(float(c0), float(c1), float(c2), vertex, residuals, False)
    vertex = float(eps[int(np.argmax(values))])
    return QuadraticFit(float(c0), float(c1), float(c2), vertex, residuals, True)


@dataclass(frozen=True)
class EpsilonOptimum:
    eps_star: float
    fit: QuadraticFit
    results: dict[float, ExperimentResult]


def optimize_epsilon(D: int, K: int, n: int, trials: int, eps_grid, master_seed,
                     variant: str = "greedy", mark_mode: str = "bernoulli",
                     min_girth: int = 3, workers: int = 1) -> EpsilonOptimum:
    """Measure C over an epsilon grid and fit the quadratic response."""
    eps_grid = tuple(float(e) for e in eps_grid)
    if len(eps_grid) < 3 or 0.0 not in eps_grid:
        raise ValueError("eps_grid needs at least 3 points and must include 0")
    cfg = RunConfig(n=n, D=D, trials=trials, master_seed=state_from((master_seed, D, K)),
                    schedule="geometric", K=K, epsilon=eps_grid[0], variant=variant,
                    mark_mode=mark_mode, min_girth=min_girth)
    results = run_experiment_multi(cfg, eps_grid, workers=workers)
    c_values = [results[e].summary.mean("scaled_constant") for e in eps_grid]
    fit = fit_epsilon_quadratic(eps_grid, c_values)
    return EpsilonOptimum(eps_star=fit.vertex, fit=fit, results=results)


# ---------------------------------------------------------------------------
# schedule optimisation: exact coordinate descent on the tree correlation
# ---------------------------------------------------------------------------

def _rho(D: int, a: np.ndarray) -> float:
    return exact_tree_correlation(D, CoefficientSchedule(a), 1).rho


def optimize_schedule(D: int, K: int, tol: float = 1e-10,
                      max_sweeps: int = 500) -> CoefficientSchedule:
    """Minimise the distance-1 tree correlation over a_1..a_K (a_0 = 1).

    Starts from the geometric schedule, so the result is never worse than it.
    In each coordinate the objective is (alpha*t + beta) / (N*t^2 + gamma),
    whose minimiser is a root of a quadratic; descent is monotone and the
    exact evaluations make the sweep deterministic.
    """
    if not 1 <= K <= OPTIMIZE_MAX_K:
        raise ValueError(f"need 1 <= K <= {OPTIMIZE_MAX_K}")
    a = geometric_schedule(D, K).a.copy()
    current = _rho(D, a)
    for _ in range(max_sweeps):
        before = current
        for i in range(1, K + 1):
            theta = a[i]
            a[i] = 0.0  # a[0] stays 1, so the schedule remains valid
            corr0 = exact_tree_correlation(D, CoefficientSchedule(a), 1)
            # beta/gamma with coordinate i zeroed; alpha from a unit probe
            beta = corr0.covariance
            n_i = float(D) * (D - 1) ** (i - 1)
            gamma = corr0.variance
            a[i] = 1.0
            alpha = exact_tree_correlation(D, CoefficientSchedule(a), 1).covariance - beta
            candidates = [theta]
            if alpha != 0.0:
                qa = alpha * n_i
                qb = 2.0 * beta * n_i
                qc = -alpha * gamma
                disc = qb * qb - 4.0 * qa * qc
                if disc >= 0.0:
                    root = math.sqrt(disc)
                    candidates.extend([(-qb + root) / (2.0 * qa), (-qb - root) / (2.0 * qa)])
            best_t, best_val = theta, math.inf
            for t in candidates:
                val = (alpha * t + beta) / (n_i * t * t + gamma)
                if val < best_val:
                    best_t, best_val = t, val
            a[i] = best_t
            new = _rho(D, a)
            assert new <= current + 1e-12, "coordinate step must never regress"
            current = new
        if before - current < tol:
            break
    return CoefficientSchedule(a)


# ---------------------------------------------------------------------------
# report serialisation
# ---------------------------------------------------------------------------

SWEEP_CSV_FIELDS = (
    "D", "K", "epsilon", "n", "trials", "schedule", "status",
    "C_mean", "C_stderr", "cut_mean", "cut_stderr", "edge_corr_mean", "flips_mean",
    "class_both_unmarked", "class_one_marked", "class_both_marked",
    "tree_like_mean", "two_over_pi", "parisi",
)


def _csv_num(v: float) -> str:
    return "" if (isinstance(v, float) and math.isnan(v)) else repr(v)


def sweep_csv_rows(report: SweepReport) -> list[list]:
    refs = reference_constants()
    out = []
    for row in report.rows:
        out.append([
            row.D, row.K, repr(row.epsilon), row.n, row.trials, row.schedule,
            row.error or "ok",
            _csv_num(row.c_mean), _csv_num(row.c_stderr),
            _csv_num(row.cut_mean), _csv_num(row.cut_stderr),
            _csv_num(row.edge_corr_mean), _csv_num(row.flips_mean),
            _csv_num(row.class_both_unmarked), _csv_num(row.class_one_marked),
            _csv_num(row.class_both_marked), _csv_num(row.tree_like_mean),
            repr(refs["two_over_pi"]), repr(refs["parisi"]),
        ])
    return out


def _nan_none(v):
    return None if (isinstance(v, float) and math.isnan(v)) else v


def sweep_report_to_dict(report: SweepReport) -> dict:
    rows = []
    for row in report.rows:
        d = {k: _nan_none(getattr(row, k)) for k in (
            "D", "K", "epsilon", "n", "trials", "schedule", "error", "c_mean",
            "c_stderr", "cut_mean", "cut_stderr", "edge_corr_mean", "flips_mean",
            "class_both_unmarked", "class_one_marked", "class_both_marked",
            "tree_like_mean")}
        rows.append(d)
    return {"spec": report.spec.to_dict(), "rows": rows,
            "best_index": report.best_index, "references": reference_constants()}


# ---------------------------------------------------------------------------
# minimal static SVG: C vs epsilon per (D, K), with reference lines
# ---------------------------------------------------------------------------

def write_sweep_svg(report: SweepReport, path) -> None:
    width, height = 640, 420
    ml, mr, mt, mb = 60, 20, 20, 45
    ok = [r for r in report.rows if r.error is None and not math.isnan(r.c_mean)]
    refs = reference_constants()
    if ok:
        xs = [r.epsilon for r in ok]
        ys = [r.c_mean for r in ok] + [refs["two_over_pi"], refs["parisi"]]
        errs = [(r.c_stderr if not math.isnan(r.c_stderr) else 0.0) for r in ok]
        ylo = min(y - e for y, e in zip(ys, errs + [0.0, 0.0]))
        yhi = max(y + e for y, e in zip(ys, errs + [0.0, 0.0]))
        xlo, xhi = min(xs), max(xs)
    else:
        xlo, xhi, ylo, yhi = 0.0, 1.0, 0.0, 1.0
    if xhi == xlo:
        xhi = xlo + 1.0
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(x):
        return ml + (x - xlo) / (xhi - xlo) * (width - ml - mr)

    def sy(y):
        return height - mb - (y - ylo) / (yhi - ylo) * (height - mt - mb)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{ml}" y1="{height-mb}" x2="{width-mr}" y2="{height-mb}" stroke="black"/>',
             f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height-mb}" stroke="black"/>',
             f'<text x="{(ml+width-mr)/2}" y="{height-10}" text-anchor="middle" font-size="13">epsilon</text>',
             f'<text x="15" y="{(mt+height-mb)/2}" font-size="13" transform="rotate(-90 15 {(mt+height-mb)/2})" text-anchor="middle">C = (cut - 1/2) * sqrt(D)</text>']
    for name, colour in (("two_over_pi", "#888888"), ("parisi", "#bb4444")):
        y = sy(refs[name])
        parts.append(f'<line x1="{ml}" y1="{y:.2f}" x2="{width-mr}" y2="{y:.2f}" '
                     f'stroke="{colour}" stroke-dasharray="6 4"/>')
        parts.append(f'<text x="{width-mr-4}" y="{y-4:.2f}" text-anchor="end" '
                     f'font-size="11" fill="{colour}">{name} = {refs[name]:.4f}</text>')
    palette = ("#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
    groups: dict[tuple[int, int], list[SweepRow]] = {}
    for r in ok:
        groups.setdefault((r.D, r.K), []).append(r)
    for gi, ((D, K), rows) in enumerate(sorted(groups.items())):
        colour = palette[gi % len(palette)]
        rows = sorted(rows, key=lambda r: r.epsilon)
        pts = " ".join(f"{sx(r.epsilon):.2f},{sy(r.c_mean):.2f}" for r in rows)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}"/>')
        for r in rows:
            x, y = sx(r.epsilon), sy(r.c_mean)
            if not math.isnan(r.c_stderr):
                parts.append(f'<line x1="{x:.2f}" y1="{sy(r.c_mean-r.c_stderr):.2f}" '
                             f'x2="{x:.2f}" y2="{sy(r.c_mean+r.c_stderr):.2f}" stroke="{colour}"/>')
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{colour}"/>')
        parts.append(f'<text x="{ml+8}" y="{mt+14+14*gi}" font-size="12" fill="{colour}">'
                     f'D={D} K={K}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
