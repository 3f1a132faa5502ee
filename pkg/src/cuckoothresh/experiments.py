"""Monte Carlo harness: single trials, load sweeps, threshold bisection and
the core / duplicate-edge / Hall-oracle validation experiments."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, TextIO

import numpy as np
from scipy.optimize import isotonic_regression

from . import analytic
from .hypergraph import (Hypergraph, count_duplicate_pairs, derive_seed, gen_binomial,
                         gen_multigraph, gen_simple, peel_core, write_hypergraph)
from .orientation import brute_force_dense_subset, is_orientable, max_matching_via_core

log = logging.getLogger(__name__)

MODELS = ("multigraph", "simple", "binomial", "cloning")
TRIAL_MODELS = ("multigraph", "simple", "binomial")
CSV_HEADER = ("k", "n", "c", "seed", "model", "orientable", "matching_size",
              "core_n2", "core_m2", "elapsed_ms")


def items_for_load(c: float, n: int) -> int:
    """floor(c n), guarded against binary round-off such as 0.905 * 1e5 = 90499.99..."""
    return int(math.floor(c * n + 1e-9))


def binomial_p(c: float, n: int, k: int) -> float:
    return min(1.0, c * k / math.comb(n - 1, k - 1))


def generate(model: str, n: int, c: float, k: int, seed: int) -> Hypergraph:
    """Random k-graph at load c in one of the distinct-vertex models."""
    if model == "multigraph":
        return gen_multigraph(n, items_for_load(c, n), k, seed)
    if model == "simple":
        return gen_simple(n, items_for_load(c, n), k, seed)
    if model == "binomial":
        return gen_binomial(n, binomial_p(c, n, k), k, seed)
    raise ValueError(f"model must be one of {TRIAL_MODELS}, got {model!r}")


@dataclass(frozen=True)
class TrialRecord:
    k: int
    n: int
    c: float
    seed: int
    model: str
    orientable: bool
    matching_size: int
    core_n2: int
    core_m2: int
    elapsed_ms: float

    @property
    def core_density(self) -> float:
        return self.core_m2 / self.core_n2 if self.core_n2 else 0.0


def run_trial(k: int, n: int, c: float, seed: int, model: str = "simple",
              backend: str = "scipy") -> TrialRecord:
    """Generate one graph, peel its core and decide orientability."""
    if model not in TRIAL_MODELS:
        raise ValueError(f"run_trial supports {TRIAL_MODELS}, got {model!r}")
    if n < k:
        raise ValueError(f"need n >= k, got n={n}, k={k}")
    t0 = time.perf_counter()
    H = generate(model, n, c, k, seed)
    core = peel_core(H)
    size = max_matching_via_core(H, core, backend=backend)
    elapsed = (time.perf_counter() - t0) * 1e3
    return TrialRecord(k=k, n=n, c=c, seed=seed, model=model, orientable=size == H.m,
                       matching_size=size, core_n2=core.n2, core_m2=core.m2, elapsed_ms=elapsed)


def _run_trial_args(args: tuple) -> TrialRecord:
    return run_trial(*args)


def _map_trials(jobs: list[tuple], workers: int) -> list[TrialRecord]:
    # results come back in job order, so output never depends on scheduling
    if workers <= 1 or len(jobs) <= 1:
        return [_run_trial_args(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial_args, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def format_float(x: float) -> str:
    return format(x, ".17g")


def write_records(records: Iterable[TrialRecord], fh: TextIO, deterministic: bool = False) -> None:
    """CSV with the fixed header; ``deterministic`` drops the timestamp line and zeroes timings."""
    if not deterministic:
        fh.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.k, r.n, format_float(r.c), r.seed, r.model, str(r.orientable).lower(),
                    r.matching_size, r.core_n2, r.core_m2,
                    format_float(0.0 if deterministic else r.elapsed_ms)])


def read_records(fh: TextIO) -> list[TrialRecord]:
    rows = csv.DictReader(line for line in fh if not line.startswith("#"))
    if tuple(rows.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    return [TrialRecord(k=int(r["k"]), n=int(r["n"]), c=float(r["c"]), seed=int(r["seed"]),
                        model=r["model"], orientable=r["orientable"] == "true",
                        matching_size=int(r["matching_size"]), core_n2=int(r["core_n2"]),
                        core_m2=int(r["core_m2"]), elapsed_ms=float(r["elapsed_ms"]))
            for r in rows]


def wilson_interval(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


@dataclass
class SweepResult:
    k: int
    n: int
    model: str
    c_values: list[float]
    successes: list[int]
    trials: list[int]
    records: list[TrialRecord] = field(default_factory=list, repr=False)

    @property
    def rates(self) -> np.ndarray:
        return np.asarray(self.successes, dtype=float) / np.asarray(self.trials, dtype=float)

    def smoothed_rates(self) -> np.ndarray:
        """Least-squares non-increasing fit to the raw success rates."""
        if len(self.c_values) == 1:
            return self.rates
        return isotonic_regression(self.rates, weights=np.asarray(self.trials, float),
                                   increasing=False).x

    def crossing(self, level: float) -> float:
        """Load where the smoothed success rate falls through ``level`` (linear interpolation)."""
        r = self.smoothed_rates()
        c = np.asarray(self.c_values)
        if r[0] < level:
            return float(c[0])
        below = np.flatnonzero(r < level)
        if below.size == 0:
            return float(c[-1])
        j = int(below[0])
        r0, r1 = r[j - 1], r[j]
        return float(c[j - 1] + (r0 - level) / (r0 - r1) * (c[j] - c[j - 1]))

    @property
    def midpoint(self) -> float:
        return self.crossing(0.5)

    def transition_window(self, upper: float = 0.9, lower: float = 0.1) -> float:
        return self.crossing(lower) - self.crossing(upper)

    def rate_at(self, c: float) -> float:
        j = int(np.argmin(np.abs(np.asarray(self.c_values) - c)))
        return float(self.rates[j])


def load_grid(c_min: float, c_max: float, step: float) -> list[float]:
    if c_max < c_min:
        raise ValueError("need c_min <= c_max")
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((c_max - c_min) / step + 1e-9)) + 1
    return [round(c_min + i * step, 12) for i in range(count)]


def sweep(k: int, n: int, c_min: float, c_max: float, step: float, trials_per_c: int,
          master_seed: int, model: str = "simple", workers: int = 1,
          backend: str = "scipy") -> SweepResult:
    """Success rate of offline assignment over a grid of loads.

    Trial t at every load uses ``derive_seed(master_seed, t)``, so grid
    points share seeds and runs are reproducible for any worker count.
    """
    grid = load_grid(c_min, c_max, step)
    seeds = [derive_seed(master_seed, t) for t in range(trials_per_c)]
    jobs = [(k, n, c, s, model, backend) for c in grid for s in seeds]
    records = _map_trials(jobs, workers)
    succ = [sum(r.orientable for r in records[i * trials_per_c:(i + 1) * trials_per_c])
            for i in range(len(grid))]
    return SweepResult(k, n, model, grid, succ, [trials_per_c] * len(grid), records)


@dataclass
class BisectionStep:
    c: float
    successes: int
    trials: int
    wilson: tuple[float, float]


def estimate_threshold(k: int, n: int, trials: int, tolerance: float, master_seed: int,
                       model: str = "simple", workers: int = 1, backend: str = "scipy",
                       history: list[BisectionStep] | None = None) -> float:
    """Bisect the load in [1/2, 1] toward a 50% assignment success rate."""
    if tolerance < 1.0 / n:
        raise ValueError(f"tolerance must be at least 1/n = {1.0 / n}")
    lo, hi = 0.5, 1.0
    seeds = [derive_seed(master_seed, t) for t in range(trials)]
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        recs = _map_trials([(k, n, mid, s, model, backend) for s in seeds], workers)
        succ = sum(r.orientable for r in recs)
        ci = wilson_interval(succ, trials)
        log.info("k=%d n=%d c=%.6f success %d/%d wilson [%.3f, %.3f]", k, n, mid, succ, trials, *ci)
        if history is not None:
            history.append(BisectionStep(mid, succ, trials, ci))
        if 2 * succ >= trials:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class CoreStatsSummary:
    k: int
    n: int
    c: float
    trials: int
    xi: float
    n2_frac: list[float]
    m2_frac: list[float]
    predicted_n2: float
    predicted_m2: float

    @property
    def mean_n2(self) -> float:
        return float(np.mean(self.n2_frac))

    @property
    def mean_m2(self) -> float:
        return float(np.mean(self.m2_frac))

    @property
    def std_n2(self) -> float:
        return float(np.std(self.n2_frac, ddof=1)) if self.trials > 1 else 0.0

    @property
    def std_m2(self) -> float:
        return float(np.std(self.m2_frac, ddof=1)) if self.trials > 1 else 0.0

    @property
    def dev_n2(self) -> float:
        return abs(self.mean_n2 - self.predicted_n2)

    @property
    def dev_m2(self) -> float:
        return abs(self.mean_m2 - self.predicted_m2)

    @property
    def densities(self) -> list[float]:
        return [m / v if v else 0.0 for v, m in zip(self.n2_frac, self.m2_frac)]

    def as_rows(self) -> list[tuple[str, str]]:
        f = format_float
        return [("k", str(self.k)), ("n", str(self.n)), ("c", f(self.c)),
                ("trials", str(self.trials)), ("xi", f(self.xi)),
                ("mean_n2_over_n", f(self.mean_n2)), ("std_n2_over_n", f(self.std_n2)),
                ("predicted_n2_over_n", f(self.predicted_n2)), ("abs_dev_n2", f(self.dev_n2)),
                ("mean_m2_over_n", f(self.mean_m2)), ("std_m2_over_n", f(self.std_m2)),
                ("predicted_m2_over_n", f(self.predicted_m2)), ("abs_dev_m2", f(self.dev_m2)),
                ("min_core_density", f(min(self.densities))),
                ("max_core_density", f(max(self.densities)))]


def core_stats_experiment(k: int, n: int, c: float, trials: int, master_seed: int,
                          model: str = "simple") -> CoreStatsSummary:
    """Empirical 2-core size against the fixed-point prediction."""
    n2, m2 = [], []
    for t in range(trials):
        H = generate(model, n, c, k, derive_seed(master_seed, t))
        core = peel_core(H)
        n2.append(core.n2 / n)
        m2.append(core.m2 / n)
    pv, pe = analytic.core_fractions(c, k) if k >= 3 else (float("nan"), float("nan"))
    xi = analytic.core_xi(c, k) if k >= 3 else float("nan")
    return CoreStatsSummary(k, n, c, trials, xi, n2, m2, pv, pe)


@dataclass
class DuplicateSummary:
    k: int
    n: int
    m: int
    trials: int
    pair_counts: list[int]
    bound: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.pair_counts)) if self.pair_counts else 0.0

    @property
    def passed(self) -> bool:
        return self.mean <= 2.0 * self.bound


def duplicate_edge_experiment(k: int, n: int, c: float, trials: int, master_seed: int,
                              m: int | None = None) -> DuplicateSummary:
    """Pairs of identical edges in H*_{n,m,k} against the bound (cn)^2 / C(n,k)."""
    if m is None:
        m = items_for_load(c, n)
    counts = [count_duplicate_pairs(gen_multigraph(n, m, k, derive_seed(master_seed, t)))
              for t in range(trials)]
    bound = (c * n) ** 2 / math.comb(n, k)
    return DuplicateSummary(k, n, m, trials, counts, bound)


@dataclass
class OracleReport:
    k: int
    instances: int
    mismatches: int
    counterexample: Hypergraph | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def serialized_counterexample(self) -> str:
        if self.counterexample is None:
            return ""
        buf = io.StringIO()
        write_hypergraph(self.counterexample, buf)
        return buf.getvalue()


def oracle_check(k: int, n_max: int, trials: int, master_seed: int,
                 orientable: Callable[[Hypergraph], bool] = is_orientable,
                 n_min: int | None = None, stop_at_first: bool = True) -> OracleReport:
    """Compare ``orientable`` against exhaustive search for an over-dense subset.

    ``trials`` random instances are spread round-robin over the (n, m) cells
    with ``n_min <= n <= n_max`` and ``1 <= m <= n + 2``, cycling through the
    multigraph, simple and binomial generators.
    """
    if n_max > 14:
        raise ValueError("the strict-density oracle is limited to n_max <= 14")
    n_min = k if n_min is None else max(k, n_min)
    cells = []
    for n in range(n_min, n_max + 1):
        for m in range(1, min(n + 2, math.comb(n, k)) + 1):
            cells.append((n, m))
    mismatches = 0
    first: Hypergraph | None = None
    detail = ""
    for i in range(trials):
        n, m = cells[i % len(cells)]
        seed = derive_seed(master_seed, i)
        kind = ("multigraph", "simple", "binomial")[(i + i // len(cells)) % 3]
        if kind == "multigraph":
            H = gen_multigraph(n, m, k, seed)
        elif kind == "simple":
            H = gen_simple(n, m, k, seed)
        else:
            H = gen_binomial(n, min(1.0, m / math.comb(n, k)), k, seed)
        claimed = orientable(H)
        witness = brute_force_dense_subset(H, strict=True)
        if claimed != (witness is None):
            mismatches += 1
            if first is None:
                first = H
                detail = (f"instance {i} ({kind}, n={n}, m={H.m}): orientable={claimed}, "
                          f"over-dense witness={witness}")
            if stop_at_first:
                return OracleReport(k, i + 1, mismatches, first, detail)
    return OracleReport(k, trials, mismatches, first, detail)


def records_to_dicts(records: Iterable[TrialRecord]) -> list[dict]:
    return [asdict(r) for r in records]

