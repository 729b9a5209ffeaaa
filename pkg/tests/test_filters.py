import numpy as np
import pytest

from gwcut import (CoefficientSchedule, build_tree, dense_ball_filter, from_edge_array,
                   generate_regular, geometric_schedule, init_gaussian,
                   multi_shell_update, one_step_update, parse_schedule, shells,
                   tanh_dynamics, tree_shell_count)


def test_init_gaussian_moments():
    x = init_gaussian(10**6, seed=42)
    assert abs(x.mean()) <= 5e-3
    assert abs(x.var() - 1.0) <= 1e-2


def test_init_gaussian_deterministic_and_prefix_stable():
    a = init_gaussian(10**5, seed=42)
    b = init_gaussian(10**6, seed=42)
    assert np.array_equal(a, b[:10**5])
    assert init_gaussian(1, seed=7) == init_gaussian(1, seed=7)
    assert init_gaussian(1, seed=7) != init_gaussian(1, seed=8)


def _star(values, center_value=1.0):
    """Star graph with given neighbour values at vertices 1..D."""
    d = len(values)
    g = from_edge_array(d + 1, [(0, i + 1) for i in range(d)], degree_hint=None)
    x = np.array([center_value] + list(values))
    return g, x


def test_one_step_zero_is_identity(small_regular, small_field):
    out = one_step_update(small_regular, small_field, 0.0)
    assert np.array_equal(out, small_field)


def test_one_step_star_example():
    g, x = _star([1.0, -2.0, 0.5], center_value=1.0)
    out = one_step_update(g, x, 2.0)
    assert out[0] == 1.0 + 2.0 * (-0.5)


def test_one_step_equals_multi_shell(small_regular, small_field):
    a = 0.37
    lhs = one_step_update(small_regular, small_field, a)
    rhs = multi_shell_update(small_regular, small_field, CoefficientSchedule([1.0, a]))
    assert np.array_equal(lhs, rhs)


def test_multi_shell_k0_identity(small_regular, small_field):
    out = multi_shell_update(small_regular, small_field, CoefficientSchedule([1.0]))
    assert np.array_equal(out, small_field)


def test_multi_shell_pure_shell2_on_tree():
    tree = build_tree(3, 3)
    x = init_gaussian(tree.n, seed=5)
    out = multi_shell_update(tree, x, CoefficientSchedule([0.0, 0.0, 1.0]))
    want = x[shells(tree, 0, 2).shells[2]].sum()
    assert out[0] == pytest.approx(want, rel=1e-14)


def test_multi_shell_matches_dense_oracle():
    g = generate_regular(180, 3, seed=21, min_girth=7)
    x = init_gaussian(g.n, seed=22)
    s = geometric_schedule(3, 2)
    out = multi_shell_update(g, x, s)
    for u in range(0, g.n, 13):
        want = dense_ball_filter(g, x, s, u)
        assert out[u] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_linearity(small_regular):
    g = small_regular
    rng = np.random.default_rng(3)
    s = geometric_schedule(4, 3)
    for _ in range(5):
        x, y = rng.standard_normal((2, g.n))
        alpha, beta = rng.standard_normal(2)
        lhs = multi_shell_update(g, alpha * x + beta * y, s)
        rhs = alpha * multi_shell_update(g, x, s) + beta * multi_shell_update(g, y, s)
        assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_output_independent_of_thread_count(small_regular, small_field):
    s = geometric_schedule(4, 3)
    a = multi_shell_update(small_regular, small_field, s, threads=1)
    b = multi_shell_update(small_regular, small_field, s, threads=2)
    c = multi_shell_update(small_regular, small_field, s, threads=5)
    assert np.array_equal(a, b) and np.array_equal(a, c)


def test_geometric_schedule_values():
    s = geometric_schedule(4, 2)
    assert np.allclose(s.a, [1.0, -0.5, 0.25], rtol=0, atol=0)
    s9 = geometric_schedule(9, 1)
    assert np.array_equal(s9.a, [1.0, -1.0 / 3.0])
    s16 = geometric_schedule(16, 5)
    assert np.all(s16.a[:-1] * s16.a[1:] < 0)  # alternating signs


def test_schedule_validation():
    with pytest.raises(ValueError):
        CoefficientSchedule([])
    with pytest.raises(ValueError):
        CoefficientSchedule([0.0, 0.0])
    with pytest.raises(ValueError):
        CoefficientSchedule([1.0, np.inf])


def test_parse_schedule_forms():
    assert np.array_equal(parse_schedule("1,-0.5,0.25").a, [1.0, -0.5, 0.25])
    assert np.array_equal(parse_schedule("geometric(4,2)").a, [1.0, -0.5, 0.25])
    assert np.array_equal(parse_schedule("geometric", D=4, K=2).a, [1.0, -0.5, 0.25])
    with pytest.raises(ValueError):
        parse_schedule("geometric")


def test_k_cap_enforced(small_regular, small_field):
    s = CoefficientSchedule([1.0] + [0.1] * 7)  # K = 7 > default cap 6
    with pytest.raises(ValueError, match="cap"):
        multi_shell_update(small_regular, small_field, s)


def test_variance_on_tree_matches_shell_counts():
    # Var[x'_root] = sum_k a_k^2 N_k on a leaf-free K-ball; >= 1e5 trials
    D, K, depth, trials = 3, 2, 3, 100_000
    tree = build_tree(D, depth)
    s = geometric_schedule(D, K)
    want = sum(float(s.a[k]) ** 2 * tree_shell_count(D, k) for k in range(K + 1))
    rng = np.random.default_rng(99)
    ball = np.concatenate(shells(tree, 0, K).shells)
    weights = np.concatenate([np.full(sh.size, s.a[k])
                              for k, sh in enumerate(shells(tree, 0, K).shells)])
    # sanity: the weighted-ball shortcut agrees with the real filter once
    x0 = init_gaussian(tree.n, seed=1)
    assert multi_shell_update(tree, x0, s)[0] == pytest.approx(
        float(x0[ball] @ weights), rel=1e-12)
    vals = rng.standard_normal((trials, ball.size)) @ weights
    var = vals.var(ddof=1)
    rel_se = np.sqrt(2.0 / (trials - 1))
    assert abs(var - want) <= 5 * rel_se * want


def test_tanh_identity_round(small_regular, small_field):
    out = tanh_dynamics(small_regular, small_field, [(1.0, 0.0, 0.0)])
    assert np.array_equal(out, small_field)


def test_tanh_linear_regime_equals_one_step(small_regular, small_field):
    a = -0.5
    lhs = tanh_dynamics(small_regular, small_field, [(1.0, a, 0.0)])
    rhs = one_step_update(small_regular, small_field, a)
    assert np.array_equal(lhs, rhs)


def test_tanh_large_beta_matches_signs(small_regular, small_field):
    g, x = small_regular, small_field
    a = -1.0 / np.sqrt(4)
    # beta large enough to push outputs near +-1 but below float64 saturation
    out = tanh_dynamics(g, x, [(1.0, a, 2.0)])
    assert np.all(np.abs(out) < 1.0)
    lin = one_step_update(g, x, a)
    assert np.array_equal(np.sign(out), np.sign(lin))


def test_tanh_validation(small_regular, small_field):
    with pytest.raises(ValueError):
        tanh_dynamics(small_regular, small_field, [])
    with pytest.raises(ValueError):
        tanh_dynamics(small_regular, small_field, [(1.0, 0.1, -1.0)])


def test_field_shape_checked(small_regular):
    with pytest.raises(ValueError):
        one_step_update(small_regular, np.zeros(3), 0.1)
    bad = np.zeros(small_regular.n)
    bad[0] = np.nan
    with pytest.raises(ValueError):
        one_step_update(small_regular, bad, 0.1)
