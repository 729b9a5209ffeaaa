"""End-to-end pipeline trials and Monte Carlo aggregation.

A trial is: Gaussian field -> shell filter (or tanh variant) -> sign
rounding -> marking -> greedy/threshold flip -> edge metrics. All
randomness derives from (master_seed, trial_index, stream tag), so trials
are reproducible and order-independent; the marking stream does not depend
on epsilon, which lets parameter sweeps share the expensive filter stage
across epsilon cells without changing any cell's results.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import asdict, dataclass, replace

import numpy as np

from .filters import CoefficientSchedule, init_gaussian, multi_shell_update, parse_schedule, tanh_dynamics
from .graphs import Graph, generate_regular, load_graph, tree_ball_size, tree_like_fraction
from .rounding import MARK_MODES, MarkSet, greedy_flip, mark_vertices, round_signs, threshold_flip
from .seeds import STREAM_FIELD, STREAM_GRAPH, STREAM_MARKS
from .theory import scaled_constant

EDGE_CLASSES = ("both_unmarked", "one_marked", "both_marked")
VARIANTS = ("plain", "greedy", "threshold", "tanh")

# Probe budget for the per-trial tree-likeness coverage report.
_TREE_REPORT_BUDGET = 4 * 10**8
_TREE_REPORT_MAX_CENTERS = 1000


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one experiment."""

    n: int
    D: int
    trials: int
    master_seed: int
    schedule: str = "geometric"  # 'geometric' (with K) or explicit 'a0,a1,...'
    K: int | None = None
    epsilon: float = 0.0
    mark_mode: str = "bernoulli"
    variant: str = "plain"
    min_girth: int = 3
    graph_file: str | None = None
    tau: float | None = None
    tanh_rounds: tuple[tuple[float, float, float], ...] | None = None
    max_attempts: int = 64

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.mark_mode not in MARK_MODES:
            raise ValueError(f"mark_mode must be one of {MARK_MODES}")
        if self.variant == "threshold" and self.tau is None:
            raise ValueError("threshold variant needs tau")
        if self.variant == "tanh":
            if not self.tanh_rounds:
                raise ValueError("tanh variant needs tanh_rounds")
            object.__setattr__(self, "tanh_rounds",
                               tuple(tuple(float(v) for v in r) for r in self.tanh_rounds))
        else:
            self.coefficient_schedule()  # fail fast on a bad schedule spec

    def coefficient_schedule(self) -> CoefficientSchedule:
        return parse_schedule(self.schedule, self.D, self.K)

    def effective_radius(self) -> int:
        if self.variant == "tanh":
            return len(self.tanh_rounds)
        return self.coefficient_schedule().K

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["tanh_rounds"] is not None:
            d["tanh_rounds"] = [list(r) for r in d["tanh_rounds"]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if d.get("tanh_rounds") is not None:
            d["tanh_rounds"] = tuple(tuple(r) for r in d["tanh_rounds"])
        return cls(**d)


@dataclass(frozen=True)
class TrialResult:
    """Metrics of one pipeline run on one graph."""

    trial: int
    cut_fraction: float
    edge_corr: float
    class_means: tuple[float, float, float]  # NaN for empty classes
    class_counts: tuple[int, int, int]
    flips: int
    marked: int
    tree_like_fraction: float

    def __post_init__(self):
        # exact by construction; a failure here means a metrics bug
        assert self.edge_corr == 1.0 - 2.0 * self.cut_fraction


def _cut_count(g: Graph, p: np.ndarray) -> int:
    if g.m == 0:
        raise ValueError("graph has no edges")
    return int(np.count_nonzero(p[g.edges[:, 0]] != p[g.edges[:, 1]]))


def cut_fraction(g: Graph, p: np.ndarray) -> float:
    """Fraction of edges whose endpoints carry opposite parts."""
    return _cut_count(g, p) / g.m


def edge_correlation(g: Graph, p: np.ndarray) -> float:
    """Mean of p_u * p_v over edges; exactly 1 - 2 * cut_fraction."""
    return 1.0 - 2.0 * (_cut_count(g, p) / g.m)


def stratified_edge_stats(g: Graph, p: np.ndarray, marks: MarkSet):
    """Mean p_u*p_v and edge count per mark class (0, 1 or 2 endpoints marked)."""
    mask = marks.mask(g.n)
    eu, ev = g.edges[:, 0], g.edges[:, 1]
    cls = mask[eu].astype(np.int64) + mask[ev]
    prod = (p[eu] * p[ev]).astype(np.float64)
    counts = np.bincount(cls, minlength=3)
    sums = np.bincount(cls, weights=prod, minlength=3)
    assert int(counts.sum()) == g.m
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return tuple(float(v) for v in means), tuple(int(c) for c in counts)


def _report_centers(n: int, D: int, radius: int) -> np.ndarray:
    per_center = 2 * min(tree_ball_size(D, radius), n) * D
    count = int(min(_TREE_REPORT_MAX_CENTERS, max(16, _TREE_REPORT_BUDGET // max(per_center, 1))))
    return np.unique(np.linspace(0, n - 1, min(count, n)).astype(np.int64))


def graph_for_trial(cfg: RunConfig, trial_index: int) -> Graph:
    """Fresh quenched graph for one trial of a generated-graph experiment."""
    return generate_regular(cfg.n, cfg.D, (cfg.master_seed, trial_index, STREAM_GRAPH),
                            min_girth=cfg.min_girth, max_attempts=cfg.max_attempts)


def _filtered_signs(g: Graph, cfg: RunConfig, trial_index: int,
                    threads: int | None = None) -> np.ndarray:
    x = init_gaussian(g.n, (cfg.master_seed, trial_index, STREAM_FIELD))
    if cfg.variant == "tanh":
        xp = tanh_dynamics(g, x, cfg.tanh_rounds, threads=threads)
    else:
        xp = multi_shell_update(g, x, cfg.coefficient_schedule(), threads=threads)
    return round_signs(xp)


def _finish_trial(g: Graph, cfg: RunConfig, trial_index: int, p0: np.ndarray,
                  epsilon: float, tree_like: float) -> TrialResult:
    marks = mark_vertices(g.n, epsilon, (cfg.master_seed, trial_index, STREAM_MARKS),
                          cfg.mark_mode)
    if cfg.variant == "greedy":
        p = greedy_flip(g, p0, marks)
    elif cfg.variant == "threshold":
        p = threshold_flip(g, p0, marks, cfg.tau, degree=cfg.D)
    else:
        p = p0
    mask = marks.mask(g.n)
    flips = int(np.count_nonzero(p[mask] != p0[mask]))
    c = _cut_count(g, p)
    means, counts = stratified_edge_stats(g, p, marks)
    return TrialResult(
        trial=trial_index,
        cut_fraction=c / g.m,
        edge_corr=1.0 - 2.0 * (c / g.m),
        class_means=means,
        class_counts=counts,
        flips=flips,
        marked=marks.size,
        tree_like_fraction=tree_like,
    )


def _tree_like_report(g: Graph, cfg: RunConfig, threads: int | None = None) -> float:
    radius = cfg.effective_radius()
    centers = _report_centers(g.n, cfg.D, radius)
    return tree_like_fraction(g, centers, radius, degree=cfg.D, threads=threads)


def run_trial_multi(g: Graph, cfg: RunConfig, trial_index: int, epsilons,
                    threads: int | None = None) -> list[TrialResult]:
    """One filter stage, evaluated at several marking fractions.

    Bitwise-identical to running each epsilon independently, because the
    field and mark streams do not involve epsilon.
    """
    p0 = _filtered_signs(g, cfg, trial_index, threads)
    tree_like = _tree_like_report(g, cfg, threads)
    return [_finish_trial(g, cfg, trial_index, p0, eps, tree_like) for eps in epsilons]


def run_trial(g: Graph, cfg: RunConfig, trial_index: int,
              threads: int | None = None) -> TrialResult:
    """Full pipeline on one graph; all randomness from (master_seed, trial_index)."""
    return run_trial_multi(g, cfg, trial_index, [cfg.epsilon], threads)[0]


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    stderr: float
    ci_low: float
    ci_high: float
    count: int


@dataclass(frozen=True)
class EstimateSummary:
    """Per-metric mean/stderr/CI over trials, plus the derived constant C."""

    n: int
    D: int
    trials: int
    metrics: dict[str, MetricSummary]

    def mean(self, name: str) -> float:
        return self.metrics[name].mean

    def stderr(self, name: str) -> float:
        return self.metrics[name].stderr


def _summarise(values) -> MetricSummary:
    vals = np.asarray(values, dtype=np.float64)
    good = vals[~np.isnan(vals)]
    if good.size == 0:
        return MetricSummary(math.nan, math.nan, math.nan, math.nan, 0)
    mean = float(good.mean())
    if good.size < 2:
        return MetricSummary(mean, math.nan, math.nan, math.nan, int(good.size))
    stderr = float(good.std(ddof=1) / math.sqrt(good.size))
    return MetricSummary(mean, stderr, mean - 1.96 * stderr, mean + 1.96 * stderr,
                         int(good.size))


def summarise_trials(cfg: RunConfig, results: list[TrialResult]) -> EstimateSummary:
    metrics: dict[str, MetricSummary] = {}
    metrics["cut_fraction"] = _summarise([r.cut_fraction for r in results])
    metrics["edge_correlation"] = _summarise([r.edge_corr for r in results])
    for i, name in enumerate(EDGE_CLASSES):
        metrics[f"class_{name}"] = _summarise([r.class_means[i] for r in results])
    metrics["flips"] = _summarise([float(r.flips) for r in results])
    metrics["marked"] = _summarise([float(r.marked) for r in results])
    metrics["tree_like_fraction"] = _summarise([r.tree_like_fraction for r in results])
    cf = metrics["cut_fraction"]
    root_d = math.sqrt(cfg.D)
    metrics["scaled_constant"] = MetricSummary(
        scaled_constant(cf.mean, cfg.D), cf.stderr * root_d,
        (cf.ci_low - 0.5) * root_d, (cf.ci_high - 0.5) * root_d, cf.count)
    return EstimateSummary(n=cfg.n, D=cfg.D, trials=len(results), metrics=metrics)


@dataclass(frozen=True)
class ExperimentResult:
    config: RunConfig
    summary: EstimateSummary
    trials: tuple[TrialResult, ...]


# spawn-pool plumbing: children rebuild graphs from seeds (or re-load the
# graph file) so no large arrays cross process boundaries
_POOL_CFG: RunConfig | None = None
_POOL_GRAPH: Graph | None = None
_POOL_EPS: tuple[float, ...] = ()


def _pool_init(cfg: RunConfig, epsilons: tuple[float, ...]):
    global _POOL_CFG, _POOL_GRAPH, _POOL_EPS
    _POOL_CFG = cfg
    _POOL_EPS = epsilons
    _POOL_GRAPH = load_graph(cfg.graph_file) if cfg.graph_file else None


def _pool_run(trial_index: int):
    try:
        g = _POOL_GRAPH if _POOL_GRAPH is not None else graph_for_trial(_POOL_CFG, trial_index)
        return run_trial_multi(g, _POOL_CFG, trial_index, _POOL_EPS)
    except Exception as exc:  # re-raised in the parent, lowest trial index first
        return exc


def _map_trials(cfg: RunConfig, epsilons: tuple[float, ...], workers: int,
                graph: Graph | None) -> list[list[TrialResult]]:
    if workers <= 1:
        if graph is None and cfg.graph_file:
            graph = load_graph(cfg.graph_file)
        out = []
        for t in range(cfg.trials):
            g = graph if graph is not None else graph_for_trial(cfg, t)
            out.append(run_trial_multi(g, cfg, t, epsilons))
        return out
    ctx = multiprocessing.get_context("spawn")
    with ctx.Pool(workers, initializer=_pool_init, initargs=(cfg, epsilons)) as pool:
        rows = pool.map(_pool_run, range(cfg.trials), chunksize=1)
    for row in rows:  # abort on the first failure in trial order
        if isinstance(row, Exception):
            raise row
    return rows


def validate_graph_file(cfg: RunConfig, g: Graph) -> None:
    if g.n != cfg.n:
        raise ValueError(f"graph file has n={g.n}, config says n={cfg.n}")
    if g.degree_hint != cfg.D:
        raise ValueError(f"graph file has D={g.degree_hint}, config says D={cfg.D}")


def run_experiment(cfg: RunConfig, workers: int = 1, graph: Graph | None = None) -> ExperimentResult:
    """cfg.trials independent trials, aggregated in ascending trial order.

    Fresh graph per trial when the graph is spec-generated; the fixed loaded
    graph when cfg.graph_file is set. Output does not depend on `workers`.
    """
    if cfg.graph_file and graph is None:
        graph = load_graph(cfg.graph_file)
    if graph is not None:
        validate_graph_file(cfg, graph)
    rows = _map_trials(cfg, (cfg.epsilon,), workers, graph)
    results = [r[0] for r in rows]
    return ExperimentResult(config=cfg, summary=summarise_trials(cfg, results),
                            trials=tuple(results))


def run_experiment_multi(cfg: RunConfig, epsilons, workers: int = 1,
                         graph: Graph | None = None) -> dict[float, ExperimentResult]:
    """run_experiment for several epsilons sharing graphs and filter stages.

    Returns, per epsilon, exactly what run_experiment(replace(cfg,
    epsilon=eps)) would return.
    """
    epsilons = tuple(float(e) for e in epsilons)
    if cfg.graph_file and graph is None:
        graph = load_graph(cfg.graph_file)
    if graph is not None:
        validate_graph_file(cfg, graph)
    rows = _map_trials(cfg, epsilons, workers, graph)
    out: dict[float, ExperimentResult] = {}
    for j, eps in enumerate(epsilons):
        cfg_eps = replace(cfg, epsilon=eps)
        results = [row[j] for row in rows]
        out[eps] = ExperimentResult(config=cfg_eps, summary=summarise_trials(cfg_eps, results),
                                    trials=tuple(results))
    return out


# ---------------------------------------------------------------------------
# serialisation helpers (NaN -> None so emitted JSON is strict)
# ---------------------------------------------------------------------------

def _json_float(v: float):
    return None if (v is None or (isinstance(v, float) and math.isnan(v))) else float(v)


def metric_to_dict(ms: MetricSummary) -> dict:
    return {"mean": _json_float(ms.mean), "stderr": _json_float(ms.stderr),
            "ci95": [_json_float(ms.ci_low), _json_float(ms.ci_high)],
            "trials": ms.count}


def summary_to_dict(summary: EstimateSummary) -> dict:
    return {name: metric_to_dict(ms) for name, ms in summary.metrics.items()}


TRIAL_CSV_FIELDS = (
    "trial", "cut_fraction", "edge_corr", "flips", "marked",
    "mean_both_unmarked", "count_both_unmarked",
    "mean_one_marked", "count_one_marked",
    "mean_both_marked", "count_both_marked",
    "tree_like_fraction",
)


def trial_csv_row(r: TrialResult) -> list:
    return [r.trial, repr(r.cut_fraction), repr(r.edge_corr), r.flips, r.marked,
            repr(r.class_means[0]), r.class_counts[0],
            repr(r.class_means[1]), r.class_counts[1],
            repr(r.class_means[2]), r.class_counts[2],
            repr(r.tree_like_fraction)]
