"""Command line entry point: ``cuckoothresh <subcommand> ...``.

Exit codes: 0 success, 1 invariant violation or counterexample, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import math
import sys
from typing import Callable, Sequence

from . import analytic
from .cuckoo_table import CuckooTable, build_offline
from .experiments import (TRIAL_MODELS, core_stats_experiment, duplicate_edge_experiment,
                          estimate_threshold, format_float, generate, oracle_check, sweep,
                          write_records)
from .hypergraph import peel_core, read_hypergraph, write_hypergraph
from .orientation import max_matching_via_core

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def int_range(text: str) -> list[int]:
    """``3``, ``3..10`` or ``3,5,8``."""
    out: list[int] = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def float_range(text: str) -> list[float]:
    """``0.7``, ``0.7,0.8`` or ``start:stop:step`` (inclusive)."""
    out: list[float] = []
    for part in text.split(","):
        if ":" in part:
            a, b, s = (float(x) for x in part.split(":"))
            count = int(math.floor((b - a) / s + 1e-9)) + 1
            out.extend(round(a + i * s, 12) for i in range(count))
        else:
            out.append(float(part))
    return out


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_table(header: Sequence[str], rows: Sequence[Sequence], path: str | None) -> None:
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(x) if isinstance(x, float) else x for x in row])


def _common(p: argparse.ArgumentParser, *, k: int | None = 3, n: int | None = 100_000,
            c: float | None = None, trials: int | None = None) -> None:
    if k is not None:
        p.add_argument("--k", type=int, default=k, help="choices per item")
    if n is not None:
        p.add_argument("--n", type=int, default=n, help="table size (vertices)")
    if c is not None:
        p.add_argument("--c", type=float, default=c, help="load, items per slot")
    if trials is not None:
        p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--deterministic", action="store_true",
                   help="omit timestamp line and timings so reruns are byte-identical")


# --- subcommands -----------------------------------------------------------

def cmd_threshold(args) -> int:
    rows = []
    for k in int_range(args.k):
        s = analytic.threshold_c_star(k)
        rows.append((k, s.xi_star, s.c_star, s.residual))
    _write_table(("k", "xi_star", "c_star", "residual"), rows, args.out)
    return EXIT_OK


def cmd_core(args) -> int:
    if args.input:
        with open(args.input) as fh:
            H = read_hypergraph(fh)
    else:
        H = generate(args.model, args.n, args.c, args.k, args.seed)
    core = peel_core(H)
    row = [H.n, H.m, H.k, core.n2, core.m2, core.density]
    header = ["n", "m", "k", "core_n2", "core_m2", "core_density"]
    if not H.multiset_edges:
        size = max_matching_via_core(H, core, backend="scipy")
        header += ["matching_size", "orientable"]
        row += [size, str(size == H.m).lower()]
    _write_table(header, [row], args.out)
    if args.core_out:
        with open(args.core_out, "w") as fh:
            write_hypergraph(H.subgraph(core.edge_indices), fh)
    return EXIT_OK


def cmd_sweep(args) -> int:
    res = sweep(args.k, args.n, args.c_min, args.c_max, args.step, args.trials, args.seed,
                model=args.model, workers=args.workers)
    with _output(args.out) as fh:
        write_records(res.records, fh, deterministic=args.deterministic)
    summary = "  ".join(f"c={c:.4f}:{s}/{t}" for c, s, t in zip(res.c_values, res.successes, res.trials))
    print(f"# success counts {summary}", file=sys.stderr)
    print(f"# estimated midpoint {res.midpoint:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args) -> int:
    est = estimate_threshold(args.k, args.n, args.trials, args.tol, args.seed,
                             model=args.model, workers=args.workers)
    exact = analytic.threshold_c_star(args.k).c_star
    _write_table(("k", "n", "trials", "tolerance", "estimate", "analytic", "abs_dev"),
                 [(args.k, args.n, args.trials, args.tol, est, exact, abs(est - exact))], args.out)
    return EXIT_OK


def cmd_core_stats(args) -> int:
    if args.k >= 3 and args.c * args.k <= analytic.lambda2(args.k):
        print("# note: c*k is below lambda2(k); every core should be empty", file=sys.stderr)
    s = core_stats_experiment(args.k, args.n, args.c, args.trials, args.seed, model=args.model)
    _write_table(("quantity", "value"), s.as_rows(), args.out)
    return EXIT_OK


def cmd_dupe_check(args) -> int:
    s = duplicate_edge_experiment(args.k, args.n, args.c, args.trials, args.seed, m=args.m)
    _write_table(("k", "n", "m", "trials", "mean_pairs", "bound", "passed"),
                 [(s.k, s.n, s.m, s.trials, s.mean, s.bound, str(s.passed).lower())], args.out)
    return EXIT_OK if s.passed else EXIT_VIOLATION


def cmd_oracle_check(args) -> int:
    rep = oracle_check(args.k, args.n_max, args.trials, args.seed)
    _write_table(("k", "n_max", "instances", "mismatches", "passed"),
                 [(args.k, args.n_max, rep.instances, rep.mismatches, str(rep.passed).lower())],
                 args.out)
    if not rep.passed:
        print(f"# counterexample: {rep.detail}", file=sys.stderr)
        sys.stderr.write(rep.serialized_counterexample())
        return EXIT_VIOLATION
    return EXIT_OK


def _analysis_rows(args) -> tuple[list[str], list[list]]:
    ks = int_range(args.k)

    def xi_for(k: int) -> float:
        return args.xi if args.xi is not None else analytic.solve_xi_star(k)

    func = args.quantity
    rows: list[list] = []
    grids: dict[str, Callable[[int], list]] = {
        "threshold": lambda k: [()],
        "lambda2": lambda k: [()],
        "corefrac": lambda k: [(c,) for c in float_range(args.c)],
        "I": lambda k: [(z,) for z in float_range(args.z)],
        "f": lambda k: [(b, q) for b in float_range(args.beta) for q in float_range(args.q)],
        "h": lambda k: [(b,) for b in float_range(args.beta)],
    }
    headers = {
        "threshold": ["k", "xi_star", "c_star", "residual"],
        "lambda2": ["k", "argmin", "lambda2"],
        "corefrac": ["k", "c", "xi", "vertex_fraction", "edge_fraction"],
        "I": ["k", "xi", "z", "T_z", "I"],
        "f": ["k", "xi", "beta", "q", "f"],
        "h": ["k", "xi", "beta", "h"],
    }
    for k in ks:
        for params in grids[func](k):
            try:
                if func == "threshold":
                    s = analytic.threshold_c_star(k)
                    vals = [s.xi_star, s.c_star, s.residual]
                elif func == "lambda2":
                    vals = [analytic.lambda2_argmin(k), analytic.lambda2(k)]
                elif func == "corefrac":
                    (c,) = params
                    vals = [c, analytic.core_xi(c, k), *analytic.core_fractions(c, k)]
                elif func == "I":
                    (z,) = params
                    ev = analytic.rate_function(z, xi_for(k))
                    vals = [ev.xi, z, ev.t_z, ev.value]
                elif func == "f":
                    b, q = params
                    xi = xi_for(k)
                    vals = [xi, b, q, analytic.f_beta_q(b, q, k, xi)]
                else:
                    (b,) = params
                    xi = xi_for(k)
                    vals = [xi, b, analytic.h_beta(b, k, xi)]
                rows.append([k, *vals, ""])
            except ValueError as exc:
                rows.append([k, *([""] * (len(headers[func]) - 1)), str(exc)])
    return headers[func] + ["error"], rows


def cmd_analysis(args) -> int:
    header, rows = _analysis_rows(args)
    _write_table(header, rows, args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    n_items = int(math.floor(args.load * args.capacity + 1e-9))
    items = list(range(n_items))
    table = CuckooTable(args.capacity, args.k, args.seed, max_steps=args.max_steps)
    failed = sum(not table.insert(x) for x in items)
    _, offline_ok = build_offline(args.capacity, args.k, args.seed, items, backend="scipy")
    _write_table(
        ("capacity", "k", "items", "max_steps", "online_success", "failures", "evictions",
         "load_factor", "offline_success"),
        [(args.capacity, args.k, n_items, table.max_steps, str(failed == 0).lower(), failed,
          table.stats.evictions, table.load_factor(), str(offline_ok).lower())],
        args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuckoothresh",
                                     description="Load thresholds for k-ary cuckoo hashing.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="analytic c_k* for a range of k")
    p.add_argument("--k", default="2..10", help="k, a..b or comma list")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("core", help="2-core of a generated or file-supplied hypergraph")
    _common(p, c=0.9)
    p.add_argument("--model", choices=TRIAL_MODELS, default="simple")
    p.add_argument("--in", dest="input", default=None, help="hypergraph text file")
    p.add_argument("--core-out", default=None, help="write the core's edges in the text format")
    p.set_defaults(func=cmd_core)

    p = sub.add_parser("sweep", help="success rate over a grid of loads")
    _common(p, trials=20)
    p.add_argument("--c-min", type=float, default=0.88)
    p.add_argument("--c-max", type=float, default=0.95)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--model", choices=TRIAL_MODELS, default="simple")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="bisection estimate of the empirical threshold")
    _common(p, trials=10)
    p.add_argument("--tol", type=float, default=0.002)
    p.add_argument("--model", choices=TRIAL_MODELS, default="simple")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("core-stats", help="empirical core size vs prediction")
    _common(p, c=0.95, trials=20)
    p.add_argument("--model", choices=TRIAL_MODELS, default="simple")
    p.set_defaults(func=cmd_core_stats)

    p = sub.add_parser("dupe-check", help="duplicate edge pairs in the multigraph model")
    _common(p, c=0.9, trials=20)
    p.add_argument("--m", type=int, default=None, help="edge count (default floor(c n))")
    p.set_defaults(func=cmd_dupe_check)

    p = sub.add_parser("oracle-check", help="matching vs brute-force Hall oracle")
    _common(p, n=None, trials=2000)
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("analysis", help="tabulate an analytic function")
    p.add_argument("quantity", metavar="func", choices=["threshold", "lambda2", "corefrac", "I", "f", "h"])
    p.add_argument("--k", default="3")
    p.add_argument("--xi", type=float, default=None, help="core parameter (default xi*(k))")
    p.add_argument("--c", default="0.95")
    p.add_argument("--z", default="2")
    p.add_argument("--beta", default="0.7")
    p.add_argument("--q", default="0.7")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analysis)

    p = sub.add_parser("table", help="fill a cuckoo table online and offline")
    p.add_argument("--capacity", "--n", dest="capacity", type=int, default=10_000)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--load", "--c", dest="load", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=None,
                   help="eviction budget per insert (default ceil(100 ln(n+1)))")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
