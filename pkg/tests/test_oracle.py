import itertools

import numpy as np
import pytest

from gwcut import (CoefficientSchedule, brute_force_max_cut, complete_graph,
                   cycle_graph, dense_ball_filter, generate_regular,
                   geometric_schedule, init_gaussian, mc_bivariate_sign_correlation,
                   multi_shell_update, petersen, sheppard, shells, build_tree,
                   tree_mc_correlation, cut_fraction, exact_tree_correlation)


def _naive_max_cut(g):
    best = -1
    for bits in itertools.product((1, -1), repeat=g.n - 1):
        p = np.array((1,) + bits, dtype=np.int8)
        cut = int(np.sum(p[g.edges[:, 0]] != p[g.edges[:, 1]]))
        best = max(best, cut)
    return best / g.m


def test_brute_force_known_values():
    assert brute_force_max_cut(cycle_graph(5))[0] == 4 / 5
    assert brute_force_max_cut(complete_graph(4))[0] == 4 / 6
    assert brute_force_max_cut(petersen())[0] == 12 / 15


def test_brute_force_witness_achieves_value():
    frac, witness = brute_force_max_cut(petersen())
    assert cut_fraction(petersen(), witness) == frac
    assert witness[0] == 1  # vertex 0 fixed
    assert cut_fraction(petersen(), -witness) == frac  # global flip invariance


@pytest.mark.parametrize("seed", range(100))
def test_brute_force_matches_naive_recount(seed):
    n = 8 + 2 * (seed % 3)
    g = generate_regular(n, 3, seed=(7, seed))
    frac, witness = brute_force_max_cut(g)
    assert frac == _naive_max_cut(g)
    assert cut_fraction(g, witness) == frac


def test_brute_force_size_cap():
    with pytest.raises(ValueError, match="capped"):
        brute_force_max_cut(generate_regular(26, 3, seed=1))


def test_mc_sign_correlation_zero():
    est, se = mc_bivariate_sign_correlation(0.0, 10**6, seed=5)
    assert abs(est) <= 0.004


def test_mc_sign_correlation_degenerate():
    est, se = mc_bivariate_sign_correlation(1.0, 10**4, seed=5)
    assert est == 1.0 and se == 0.0


def test_mc_sign_correlation_matches_sheppard():
    est, se = mc_bivariate_sign_correlation(-0.5, 10**6, seed=6)
    assert abs(est - sheppard(-0.5)) <= 5 * se
    assert sheppard(-0.5) == pytest.approx(-1.0 / 3.0, rel=1e-14)


def test_tree_mc_matches_closed_form():
    sched = CoefficientSchedule([1.0, -1.0 / 3.0])
    rho_hat, se = tree_mc_correlation(9, sched, 1, trials=10**5, seed=8)
    assert abs(rho_hat - (-1.0 / 3.0)) <= 5 * se


def test_tree_mc_independent_fields_at_distance():
    rho_hat, se = tree_mc_correlation(5, CoefficientSchedule([1.0]), 2,
                                      trials=4 * 10**4, seed=9)
    assert abs(rho_hat) <= 5 * se


def test_tree_mc_self_correlation_exact():
    rho_hat, se = tree_mc_correlation(3, geometric_schedule(3, 2), 0,
                                      trials=1000, seed=10)
    assert rho_hat == 1.0 and se == 0.0


def test_tree_mc_size_limit():
    with pytest.raises(ValueError, match="too large"):
        tree_mc_correlation(16, geometric_schedule(16, 4), 2, trials=100, seed=1)


def test_dense_ball_k0():
    g = cycle_graph(6)
    x = init_gaussian(6, seed=3)
    assert dense_ball_filter(g, x, CoefficientSchedule([2.5]), 4) == 2.5 * x[4]


def test_dense_ball_single_shell_on_tree():
    tree = build_tree(3, 3)
    x = init_gaussian(tree.n, seed=4)
    got = dense_ball_filter(tree, x, CoefficientSchedule([0.0, 1.0]), 0)
    want = sum(float(x[w]) for w in shells(tree, 0, 1).shells[1])
    assert got == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("seed", range(0, 100, 7))
def test_dense_ball_differential(seed):
    g = generate_regular(100, 4, seed=(11, seed))
    x = init_gaussian(g.n, seed=(12, seed))
    s = geometric_schedule(4, 3)
    out = multi_shell_update(g, x, s)
    for u in range(0, 100, 9):
        want = dense_ball_filter(g, x, s, u)
        assert out[u] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_dense_ball_size_cap():
    g = generate_regular(600, 3, seed=1)
    with pytest.raises(ValueError, match="capped"):
        dense_ball_filter(g, np.zeros(600), geometric_schedule(3, 2), 0)


def test_exact_tree_consistency_with_mc_grid():
    # theory-module invariant: exact enumeration vs tree Monte Carlo
    for D, K in ((3, 1), (3, 4), (9, 2), (9, 4), (16, 2)):
        sched = geometric_schedule(D, K)
        want = exact_tree_correlation(D, sched, 1).rho
        got, se = tree_mc_correlation(D, sched, 1, trials=3 * 10**4, seed=(13, D, K))
        assert abs(got - want) <= 5 * max(se, 1e-12), (D, K)
