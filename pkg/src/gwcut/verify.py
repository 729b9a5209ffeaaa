"""Oracle and differential self-checks behind the `verify` CLI command.

Each suite returns individual pass/fail checks; the CLI exits nonzero if
any check fails. The brute-force helpers here are intentionally naive and
independent of the compiled kernels.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .estimator import RunConfig, cut_fraction, run_trial
from .filters import CoefficientSchedule, geometric_schedule, init_gaussian, multi_shell_update
from .graphs import ACYCLIC, Graph, build_tree, generate_regular, girth, petersen, shells
from .oracle import brute_force_max_cut, dense_ball_filter, mc_bivariate_sign_correlation, tree_mc_correlation
from .theory import exact_tree_correlation, sheppard


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class SuiteResult:
    name: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def brute_girth(g: Graph) -> int | str:
    """Girth by per-edge shortest alternative path; naive but independent."""
    best = math.inf
    for u, v in g.edges:
        u, v = int(u), int(v)
        dist = {u: 0}
        queue = deque([u])
        found = None
        while queue:
            a = queue.popleft()
            for b in g.neighbors(a):
                b = int(b)
                if a == u and b == v:
                    continue  # skip the edge itself
                if b not in dist:
                    dist[b] = dist[a] + 1
                    if b == v:
                        found = dist[b]
                        queue.clear()
                        break
                    queue.append(b)
        if found is not None:
            best = min(best, found + 1)
    return ACYCLIC if best is math.inf else int(best)


def suite_graph() -> list[Check]:
    checks = []
    p = petersen()
    checks.append(Check("petersen girth kernel vs naive oracle",
                        girth(p) == 5 and brute_girth(p) == 5,
                        f"kernel={girth(p)} naive={brute_girth(p)}"))
    tree = build_tree(3, 4)
    sh = shells(tree, 0, 3)
    sizes = [s.size for s in sh.shells]
    checks.append(Check("tree shell sizes 1,3,6,12", sizes == [1, 3, 6, 12], str(sizes)))
    checks.append(Check("tree is acyclic", girth(tree) == ACYCLIC, str(girth(tree))))
    g1 = generate_regular(400, 3, seed=11, min_girth=6)
    g2 = generate_regular(400, 3, seed=11, min_girth=6)
    checks.append(Check("generation deterministic",
                        np.array_equal(g1.edges, g2.edges), ""))
    checks.append(Check("generated graph 3-regular", bool(np.all(g1.degrees() == 3)), ""))
    gv = girth(g1)
    checks.append(Check("generated girth >= 6", gv == ACYCLIC or gv >= 6, f"girth={gv}"))
    return checks


def suite_sheppard() -> list[Check]:
    checks = []
    for rho in (-0.8, -0.3, 0.0, 0.5, 0.9):
        est, se = mc_bivariate_sign_correlation(rho, 200_000, seed=(17, int(rho * 10)))
        want = sheppard(rho)
        ok = abs(est - want) <= 5 * max(se, 1e-12)
        checks.append(Check(f"arcsine identity at rho={rho}", ok,
                            f"mc={est:.5f} exact={want:.5f} se={se:.2g}"))
    return checks


def suite_tree_correlation() -> list[Check]:
    checks = []
    for D, K in ((3, 1), (3, 2), (9, 1), (9, 2)):
        s = geometric_schedule(D, K)
        want = exact_tree_correlation(D, s, 1).rho
        got, se = tree_mc_correlation(D, s, 1, trials=30_000, seed=(23, D, K))
        ok = abs(got - want) <= 5 * max(se, 1e-12)
        checks.append(Check(f"tree correlation D={D} K={K}", ok,
                            f"mc={got:.5f} exact={want:.5f} se={se:.2g}"))
    want = exact_tree_correlation(9, CoefficientSchedule([1.0, -1.0 / 3.0]), 1).rho
    checks.append(Check("closed form rho(9, (1,-1/3), 1) = -1/3",
                        abs(want + 1.0 / 3.0) < 1e-15, f"{want!r}"))
    return checks


def suite_filter() -> list[Check]:
    checks = []
    worst = 0.0
    for i in range(30):
        g = generate_regular(100, 4, seed=(31, i))
        x = init_gaussian(g.n, (37, i))
        s = geometric_schedule(4, 3)
        got = multi_shell_update(g, x, s)
        for u in range(0, g.n, 17):
            want = dense_ball_filter(g, x, s, u)
            scale = max(abs(want), 1e-9)
            worst = max(worst, abs(got[u] - want) / scale)
    checks.append(Check("dense ball differential (30 graphs)", worst <= 1e-12,
                        f"worst rel err {worst:.2e}"))
    return checks


def suite_maxcut() -> list[Check]:
    checks = []
    worst_gap = math.inf
    ok = True
    for i in range(40):
        n = 8 + 2 * (i % 5)
        g = generate_regular(n, 3, seed=(41, i))
        cfg = RunConfig(n=n, D=3, trials=1, master_seed=43 + i, schedule="geometric",
                        K=2, epsilon=0.3, variant="greedy")
        res = run_trial(g, cfg, 0)
        opt, _ = brute_force_max_cut(g)
        ok = ok and res.cut_fraction <= opt + 1e-12
        worst_gap = min(worst_gap, opt - res.cut_fraction)
    checks.append(Check("pipeline never beats brute force (40 instances)", ok,
                        f"min optimum-pipeline gap {worst_gap:.4f}"))
    frac, witness = brute_force_max_cut(petersen())
    checks.append(Check("petersen optimum 12/15", abs(frac - 0.8) < 1e-15, f"{frac}"))
    checks.append(Check("witness achieves the optimum",
                        cut_fraction(petersen(), witness) == frac, ""))
    return checks


SUITES = {
    "graph": suite_graph,
    "sheppard": suite_sheppard,
    "tree-correlation": suite_tree_correlation,
    "filter": suite_filter,
    "maxcut": suite_maxcut,
}


def run_suites(names=None) -> list[SuiteResult]:
    picked = list(SUITES) if not names else list(names)
    results = []
    for name in picked:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
        results.append(SuiteResult(name=name, checks=tuple(SUITES[name]())))
    return results
