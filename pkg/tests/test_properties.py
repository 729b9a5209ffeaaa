"""Statistical invariants at moderate scale (the full-size versions live in
test_acceptance.py). Tolerances are the spec'd multiples of measured stderr."""
import math

import numpy as np

from gwcut import RunConfig, geometric_schedule, run_experiment


def _pooled(se1, se2):
    return math.sqrt(se1 * se1 + se2 * se2)


def test_one_marked_at_least_as_negative_d10():
    # greedy never hurts locally: one-marked class mean <= both-unmarked + 5 se
    cfg = RunConfig(n=20_000, D=10, trials=30, master_seed=6101, schedule="geometric",
                    K=3, epsilon=0.2, variant="greedy")
    res = run_experiment(cfg)
    uu = res.summary.metrics["class_both_unmarked"]
    om = res.summary.metrics["class_one_marked"]
    assert om.mean <= uu.mean + 5 * _pooled(uu.stderr, om.stderr)


def test_one_marked_improvement_strict_d20():
    # the flip gain is strict: gap >= 3 stderr of the per-trial difference
    cfg = RunConfig(n=50_000, D=20, trials=40, master_seed=6202, schedule="geometric",
                    K=3, epsilon=0.2, variant="greedy")
    res = run_experiment(cfg)
    diffs = np.array([t.class_means[0] - t.class_means[1] for t in res.trials])
    se = diffs.std(ddof=1) / math.sqrt(len(diffs))
    assert diffs.mean() >= 3 * se
    assert diffs.mean() > 0


def test_alternation_symmetry_statistical():
    # marks = all, schedule vs sign-alternated schedule, girth > 2K + 2
    D, K, n = 3, 2, 20_000
    sched = geometric_schedule(D, K)
    alt = sched.alternated()
    base = dict(n=n, D=D, trials=50, master_seed=6303, K=None, epsilon=1.0,
                variant="greedy", min_girth=2 * K + 3)
    res_a = run_experiment(RunConfig(schedule=sched.tokens(), **base))
    res_b = run_experiment(RunConfig(schedule=alt.tokens(), **base))
    ca = res_a.summary.metrics["edge_correlation"]
    cb = res_b.summary.metrics["edge_correlation"]
    assert abs(ca.mean + cb.mean) <= 5 * _pooled(ca.stderr, cb.stderr)
    # and the effect is real: the two runs sit on opposite sides of zero
    assert ca.mean * cb.mean < 0
