"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 budget
refusal. All outputs embed the resolved configuration; timestamps live only
in a separate metadata field so re-runs reproduce result bytes.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from . import __version__
from .estimator import (TRIAL_CSV_FIELDS, RunConfig, graph_for_trial, run_experiment,
                        summary_to_dict, trial_csv_row)
from .filters import parse_schedule
from .graphs import load_graph, save_graph
from .rounding import mark_vertices
from .seeds import STREAM_MARKS
from .sweep import (BudgetExceededError, SWEEP_CSV_FIELDS, SweepSpec, grid_sweep,
                    optimize_schedule, sweep_csv_rows, sweep_report_to_dict, write_sweep_svg)
from .theory import (asymptotic_rho, exact_tree_correlation, predicted_cut_fraction,
                     reference_constants, scaled_constant)
from .verify import run_suites

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_BUDGET = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gwcut", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("theory", help="closed-form prediction table")
    t.add_argument("--D", type=int, required=True)
    t.add_argument("--K", type=int, required=True)
    t.add_argument("--schedule", default="geometric",
                   help="'geometric' or explicit 'a0,a1,...'")
    t.add_argument("--csv", action="store_true", help="emit CSV instead of text")
    t.add_argument("--asymptotic", action="store_true",
                   help="print only the leading-order rho")

    r = sub.add_parser("run", help="run a Monte Carlo experiment")
    r.add_argument("--config", help="JSON config (or a previous run's output JSON)")
    r.add_argument("--n", type=int)
    r.add_argument("--D", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int, dest="master_seed")
    r.add_argument("--schedule", default="geometric")
    r.add_argument("--K", type=int)
    r.add_argument("--epsilon", type=float, default=0.0)
    r.add_argument("--mark-mode", choices=("bernoulli", "exact"), default="bernoulli")
    r.add_argument("--variant", choices=("plain", "greedy", "threshold", "tanh"),
                   default="plain")
    r.add_argument("--tau", type=float)
    r.add_argument("--tanh-rounds", help="rounds as 'c_self,c_nbr,beta;...'")
    r.add_argument("--min-girth", type=int, default=3)
    r.add_argument("--graph-file", help="fixed graph in edge-list format")
    r.add_argument("--max-attempts", type=int, default=64)
    r.add_argument("--out", help="output prefix; writes PREFIX.json and PREFIX.csv")
    r.add_argument("--per-trial", action="store_true", help="one CSV row per trial")
    r.add_argument("--workers", type=int, default=1,
                   help="process workers; never changes output bytes")
    r.add_argument("--dump-partition", help="write trial 0 partition (one line of +-1)")
    r.add_argument("--dump-marks", help="write trial 0 marked ids (sorted, one line)")
    r.add_argument("--save-graph", help="write trial 0 graph in edge-list format")

    v = sub.add_parser("verify", help="run oracle/differential self-checks")
    v.add_argument("--suite", action="append",
                   help="restrict to named suite(s); repeatable")

    s = sub.add_parser("sweep", help="grid sweep from a JSON spec")
    s.add_argument("--config", required=True, help="JSON SweepSpec document")
    s.add_argument("--out", required=True, help="output prefix (.csv/.json[/.svg])")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--budget-cap", type=float, help="override the spec's budget cap")
    s.add_argument("--svg", action="store_true", help="also emit a static SVG plot")

    o = sub.add_parser("optimize-schedule", help="coordinate descent on the tree correlation")
    o.add_argument("--D", type=int, required=True)
    o.add_argument("--K", type=int, required=True)
    return p


def _theory_row(D: int, K: int, schedule_spec: str) -> dict:
    schedule = parse_schedule(schedule_spec, D, K)
    corr = exact_tree_correlation(D, schedule, 1)
    cut = predicted_cut_fraction(corr.rho)
    refs = reference_constants()
    asym = asymptotic_rho(D, schedule.K) if schedule.K >= 2 else None
    return {
        "D": D, "K": schedule.K, "schedule": schedule.tokens(),
        "rho_exact": corr.rho, "rho_asymptotic": asym,
        "predicted_cut_fraction": cut, "predicted_C": scaled_constant(cut, D),
        "two_over_pi": refs["two_over_pi"], "parisi": refs["parisi"],
    }


def cmd_theory(args) -> int:
    row = _theory_row(args.D, args.K, args.schedule)
    if args.asymptotic:
        if row["rho_asymptotic"] is None:
            print("asymptotic rho needs K >= 2", file=sys.stderr)
            return EXIT_USAGE
        print(repr(row["rho_asymptotic"]))
        return EXIT_OK
    keys = list(row)
    if args.csv:
        w = csv.writer(sys.stdout)
        w.writerow(keys)
        w.writerow(["" if row[k] is None else row[k] for k in keys])
    else:
        pad = max(len(k) for k in keys)
        for k in keys:
            val = row[k]
            print(f"{k:<{pad}}  {val if isinstance(val, (str, int)) or val is None else f'{val:.6f}'}")
    return EXIT_OK


def _parse_tanh_rounds(text: str):
    rounds = []
    for part in text.split(";"):
        c_self, c_nbr, beta = (float(v) for v in part.split(","))
        rounds.append((c_self, c_nbr, beta))
    return tuple(rounds)


def _config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        return RunConfig.from_dict(doc["config"] if "config" in doc else doc)
    if args.graph_file and (args.n is None or args.D is None):
        g = load_graph(args.graph_file)
        if g.degree_hint is None:
            raise ValueError("graph file is not regular; pass --n/--D explicitly")
        args.n = g.n if args.n is None else args.n
        args.D = g.degree_hint if args.D is None else args.D
    missing = [k for k in ("n", "D", "trials", "master_seed") if getattr(args, k) is None]
    if missing:
        raise ValueError(f"missing required arguments: {', '.join('--' + m for m in missing)}")
    return RunConfig(
        n=args.n, D=args.D, trials=args.trials, master_seed=args.master_seed,
        schedule=args.schedule, K=args.K, epsilon=args.epsilon,
        mark_mode=args.mark_mode, variant=args.variant, min_girth=args.min_girth,
        graph_file=args.graph_file, tau=args.tau,
        tanh_rounds=_parse_tanh_rounds(args.tanh_rounds) if args.tanh_rounds else None,
        max_attempts=args.max_attempts)


def _write_run_outputs(prefix: str, result, workers: int, per_trial: bool) -> None:
    doc = {
        "config": result.config.to_dict(),
        "metadata": {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "package_version": __version__,
            "workers": workers,
        },
        "metrics": summary_to_dict(result.summary),
        "references": reference_constants(),
    }
    with open(prefix + ".json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(prefix + ".csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_CSV_FIELDS)
        if per_trial:
            for tr in result.trials:
                w.writerow(trial_csv_row(tr))
        met = result.summary.metrics

        def cell(v):
            return "" if v is None or v != v else repr(v)

        names = ["cut_fraction", "edge_correlation", "flips", "marked",
                 "class_both_unmarked", "class_one_marked", "class_both_marked",
                 "tree_like_fraction"]
        for label, pick in (("mean", lambda ms: ms.mean), ("stderr", lambda ms: ms.stderr)):
            row = [label, cell(pick(met["cut_fraction"])), cell(pick(met["edge_correlation"])),
                   cell(pick(met["flips"])), cell(pick(met["marked"]))]
            for cname in ("class_both_unmarked", "class_one_marked", "class_both_marked"):
                row.extend([cell(pick(met[cname])), ""])
            row.append(cell(pick(met["tree_like_fraction"])))
            w.writerow(row)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    result = run_experiment(cfg, workers=max(1, args.workers))
    met = result.summary.metrics
    refs = reference_constants()

    def fmt(ms):
        if ms.mean != ms.mean:  # NaN
            return "n/a"
        if ms.stderr != ms.stderr:
            return f"{ms.mean:.6f} (stderr n/a)"
        return f"{ms.mean:.6f} +- {ms.stderr:.6f}"

    print(f"cut fraction   {fmt(met['cut_fraction'])}")
    print(f"edge corr      {fmt(met['edge_correlation'])}")
    print(f"C              {fmt(met['scaled_constant'])}   "
          f"(2/pi = {refs['two_over_pi']:.4f}, Parisi = {refs['parisi']:.3f})")
    print(f"flips          {fmt(met['flips'])}")
    print(f"tree-like      {fmt(met['tree_like_fraction'])}")
    if args.out:
        _write_run_outputs(args.out, result, max(1, args.workers), args.per_trial)
    if args.dump_partition or args.dump_marks or args.save_graph:
        g = load_graph(cfg.graph_file) if cfg.graph_file else graph_for_trial(cfg, 0)
        if args.save_graph:
            save_graph(g, args.save_graph)
        if args.dump_partition:
            from .estimator import _filtered_signs  # trial 0 pipeline, pre-flip marks
            p0 = _filtered_signs(g, cfg, 0)
            with open(args.dump_partition, "w") as fh:
                fh.write(" ".join(str(int(v)) for v in p0) + "\n")
        if args.dump_marks:
            marks = mark_vertices(g.n, cfg.epsilon, (cfg.master_seed, 0, STREAM_MARKS),
                                  cfg.mark_mode)
            with open(args.dump_marks, "w") as fh:
                fh.write(" ".join(str(int(v)) for v in marks.marked) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = run_suites(args.suite)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_USAGE
    failed = 0
    for suite in results:
        npass = sum(c.ok for c in suite.checks)
        status = "ok" if suite.passed else "FAIL"
        print(f"[{status}] {suite.name}: {npass}/{len(suite.checks)} checks passed")
        for c in suite.checks:
            if not c.ok:
                failed += 1
                print(f"    FAIL {c.name}: {c.detail}")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        spec_doc = json.load(fh)
    if args.budget_cap is not None:
        spec_doc["budget_cap"] = args.budget_cap
    spec = SweepSpec.from_dict(spec_doc)
    try:
        report = grid_sweep(spec, workers=max(1, args.workers))
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    with open(args.out + ".csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_CSV_FIELDS)
        w.writerows(sweep_csv_rows(report))
    with open(args.out + ".json", "w") as fh:
        json.dump(sweep_report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.svg:
        write_sweep_svg(report, args.out + ".svg")
    best = report.best()
    if best is not None:
        print(f"best cell: D={best.D} K={best.K} epsilon={best.epsilon} "
              f"C={best.c_mean:.5f} +- {best.c_stderr:.5f}")
    else:
        print("no successful cells")
    return EXIT_OK


def cmd_optimize_schedule(args) -> int:
    schedule = optimize_schedule(args.D, args.K)
    corr = exact_tree_correlation(args.D, schedule, 1)
    cut = predicted_cut_fraction(corr.rho)
    print(f"schedule       {schedule.tokens()}")
    print(f"rho            {corr.rho!r}")
    print(f"predicted cut  {cut!r}")
    print(f"predicted C    {scaled_constant(cut, args.D)!r}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "theory": cmd_theory,
        "run": cmd_run,
        "verify": cmd_verify,
        "sweep": cmd_sweep,
        "optimize-schedule": cmd_optimize_schedule,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
