"""Experiment drivers: exhaustive small-n oracles, Monte Carlo, data emitters.

Every run is fully determined by its configuration and seed.  Random
permutations come from seeded Fisher-Yates shuffles on counter-based
per-sample streams, so splitting a sample range across workers never changes
the output.  Exhaustive averages are exact rationals; equality flags in the
reports are exact rational comparisons, never float comparisons.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations as _lex_permutations
from typing import Iterator, Optional

import numpy as np
from numba import njit

from . import exact_analysis, rde_limit, urn_model
from ._rng import fill_permutation, stream_init
from .sort_core import _partition_kernel, _sort_classic_kernel, _sort_count_kernel
from .urn_model import UrnComposition

__all__ = [
    "UsageError",
    "ExperimentConfig",
    "RunRecord",
    "PermutationIterator",
    "run_exhaustive",
    "run_exhaustive_partition",
    "exhaustive_partition_distribution",
    "run_montecarlo",
    "montecarlo_runs",
    "normalized_costs",
    "emit_scatter",
    "ks_distance",
    "urn_report",
    "tollmoments_report",
    "rde_report",
    "permutation_census",
]

EXHAUSTIVE_MAX_N = 10


class UsageError(ValueError):
    """Invalid configuration or command usage (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    """Bundle of knobs that, together with the seed, determines a run."""

    subcommand: str = ""
    n: int = 10_000
    samples: int = 1000
    seed: int = 0
    depth: int = 25
    prune_eps: float = 1e-4
    output_path: Optional[str] = None
    output_format: str = "json"
    workers: int = 1
    variant: str = "both"

    def validate(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must fit in 64 unsigned bits")
        if self.output_format not in ("json", "csv"):
            raise UsageError(f"unknown output format {self.output_format!r}")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if self.variant not in ("count", "classic", "both"):
            raise UsageError(f"unknown variant {self.variant!r}")
        if self.subcommand in ("exhaustive", "partition"):
            if not 2 <= self.n <= EXHAUSTIVE_MAX_N:
                raise UsageError(
                    f"exhaustive mode needs 2 <= n <= {EXHAUSTIVE_MAX_N}, got {self.n}")
        if self.subcommand == "mc":
            if self.n < 100 or self.samples < 100:
                raise UsageError("Monte Carlo mode needs n >= 100 and samples >= 100")
        if self.subcommand in ("mc", "scatter", "rde"):
            if self.n < 1 or self.samples < 1:
                raise UsageError("n and samples must be positive")
        if self.depth < 1:
            raise UsageError("depth must be at least 1")
        if not 0.0 <= self.prune_eps < 1.0:
            raise UsageError("prune_eps must lie in [0, 1)")

    def echo(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "depth": self.depth,
            "prune_eps": self.prune_eps,
            "output_path": self.output_path,
            "output_format": self.output_format,
            "workers": self.workers,
            "variant": self.variant,
        }


@dataclass(frozen=True)
class RunRecord:
    """One sorted sample for the scatter emitter."""

    variant: str
    n: int
    sample_index: int
    comparisons: int
    half_swaps: int
    norm_c: float
    norm_s: float

    def csv_row(self) -> list:
        return [self.variant, self.n, self.sample_index, self.comparisons,
                self.half_swaps, repr(self.norm_c), repr(self.norm_s)]


SCATTER_HEADER = ["variant", "n", "sample_index", "comparisons", "half_swaps",
                  "norm_c", "norm_s"]


class PermutationIterator:
    """All permutations of 1..n, each exactly once, in lexicographic order."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n

    def __len__(self) -> int:
        return math.factorial(self.n)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(_lex_permutations(range(1, self.n + 1)))


# --------------------------------------------------------------------------
# jitted enumeration and Monte Carlo kernels


@njit(cache=True, nogil=True)
def _next_permutation(p):
    """Advance to the lexicographic successor in place; False after the last."""
    n = p.shape[0]
    i = n - 2
    while i >= 0 and p[i] >= p[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while p[j] <= p[i]:
        j -= 1
    tmp = p[i]
    p[i] = p[j]
    p[j] = tmp
    lo = i + 1
    hi = n - 1
    while lo < hi:
        tmp = p[lo]
        p[lo] = p[hi]
        p[hi] = tmp
        lo += 1
        hi -= 1
    return True


@njit(cache=True, nogil=True)
def _exhaustive_sort_kernel(n):
    """Total comparisons and half-swaps of full sorts over all n! permutations."""
    perm = np.empty(n, np.int64)
    for v in range(n):
        perm[v] = v + 1
    work = np.empty(n, np.int64)
    counters = np.zeros(3, np.int64)
    no_outcomes = np.empty((0, 9), np.int64)
    total_c = np.int64(0)
    total_h = np.int64(0)
    count = np.int64(0)
    while True:
        for v in range(n):
            work[v] = perm[v]
        counters[0] = 0
        counters[1] = 0
        counters[2] = 0
        _sort_count_kernel(work, counters, no_outcomes)
        total_c += counters[0]
        total_h += 2 * counters[1] + 3 * counters[2]
        count += 1
        if not _next_permutation(perm):
            break
    return total_c, total_h, count


@njit(cache=True, nogil=True)
def _exhaustive_partition_kernel(n):
    """First-partition totals over all n! permutations.

    Returns (totals, dist, count) where totals holds the sums of
    (i1, i2, i3, s_plus, m_plus, l_plus, t_c, t_s_half) and dist[i1, i2]
    counts the sublist-size outcomes.
    """
    perm = np.empty(n, np.int64)
    for v in range(n):
        perm[v] = v + 1
    work = np.empty(n, np.int64)
    counters = np.zeros(3, np.int64)
    no_trace = np.empty(0, np.int8)
    totals = np.zeros(8, np.int64)
    dist = np.zeros((n - 1, n - 1), np.int64)
    count = np.int64(0)
    while True:
        for v in range(n):
            work[v] = perm[v]
        counters[0] = 0
        counters[1] = 0
        counters[2] = 0
        res = _partition_kernel(work, 0, n - 1, counters, no_trace, no_trace)
        totals[0] += res[2]
        totals[1] += res[3]
        totals[2] += res[4]
        totals[3] += res[5]
        totals[4] += res[6]
        totals[5] += res[7]
        totals[6] += res[8]
        totals[7] += res[9]
        dist[res[2], res[3]] += 1
        count += 1
        if not _next_permutation(perm):
            break
    return totals, dist, count


@njit(cache=True, nogil=True)
def _mc_kernel(n, start, stop, seed, variant, out):
    """Sort random permutations for sample indices [start, stop).

    out[s - start] receives (comparisons, half_swaps) of sample s.  variant 0
    is the dual-pivot sort, 1 the classic baseline.
    """
    buf = np.empty(n, np.int64)
    counters = np.zeros(3, np.int64)
    no_outcomes = np.empty((0, 9), np.int64)
    for s in range(start, stop):
        state = stream_init(seed, s)
        fill_permutation(state, buf)
        counters[0] = 0
        counters[1] = 0
        counters[2] = 0
        if variant == 0:
            _sort_count_kernel(buf, counters, no_outcomes)
        else:
            _sort_classic_kernel(buf, counters)
        out[s - start, 0] = counters[0]
        out[s - start, 1] = 2 * counters[1] + 3 * counters[2]


@njit(cache=True, nogil=True)
def _census_kernel(n, draws, seed):
    """Count Fisher-Yates outcomes by Lehmer index over `draws` permutations."""
    total = 1
    for v in range(2, n + 1):
        total *= v
    counts = np.zeros(total, np.int64)
    buf = np.empty(n, np.int64)
    for s in range(draws):
        state = stream_init(seed, s)
        fill_permutation(state, buf)
        index = np.int64(0)
        for pos in range(n):
            smaller = 0
            for rest in range(pos + 1, n):
                if buf[rest] < buf[pos]:
                    smaller += 1
            index = index * (n - pos) + smaller
        counts[index] += 1
    return counts


def permutation_census(n: int, draws: int, seed: int) -> np.ndarray:
    """Observed counts of each of the n! permutations over `draws` shuffles."""
    if n < 1 or n > 8:
        raise ValueError("census supports 1 <= n <= 8")
    return _census_kernel(np.int64(n), np.int64(draws), np.int64(seed))


# --------------------------------------------------------------------------
# exhaustive oracles


def _fr(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def run_exhaustive(n: int) -> dict:
    """Exact averages of full-sort costs over all n! permutations of 1..n."""
    if not 2 <= n <= EXHAUSTIVE_MAX_N:
        raise UsageError(f"exhaustive mode needs 2 <= n <= {EXHAUSTIVE_MAX_N}, got {n}")
    total_c, total_h, count = _exhaustive_sort_kernel(np.int64(n))
    count = int(count)
    if count != math.factorial(n):
        raise AssertionError("permutation enumeration lost or repeated entries")
    mean_c = Fraction(int(total_c), count)
    mean_h = Fraction(int(total_h), count)
    formula_c = exact_analysis.mean_comparisons(n)
    formula_s = exact_analysis.mean_swaps(n)
    comparisons_equal = mean_c == formula_c
    half_swaps_equal = mean_h == 2 * formula_s
    return {
        "n": n,
        "permutations": count,
        "mean_comparisons": _fr(mean_c),
        "mean_comparisons_formula": _fr(formula_c),
        "comparisons_equal": comparisons_equal,
        "mean_swaps": _fr(mean_h / 2),
        "mean_swaps_formula": _fr(formula_s),
        "mean_half_swaps": _fr(mean_h),
        "half_swaps_equal": half_swaps_equal,
        "passed": bool(comparisons_equal and half_swaps_equal),
    }


def run_exhaustive_partition(n: int) -> dict:
    """Exact first-partition averages over all n! permutations of 1..n."""
    if not 2 <= n <= EXHAUSTIVE_MAX_N:
        raise UsageError(f"exhaustive mode needs 2 <= n <= {EXHAUSTIVE_MAX_N}, got {n}")
    totals, _, count = _exhaustive_partition_kernel(np.int64(n))
    count = int(count)
    if count != math.factorial(n):
        raise AssertionError("permutation enumeration lost or repeated entries")
    mean_ts = Fraction(int(totals[7]), 2 * count)   # swap units
    mean_tc = Fraction(int(totals[6]), count)
    mean_sp = Fraction(int(totals[3]), count)
    mean_lp_minus_mp = Fraction(int(totals[5]) - int(totals[4]), count)
    formula_ts = exact_analysis.mean_partition_swaps(n)
    formula_sp = exact_analysis.mean_splus(n)
    swaps_equal = mean_ts == formula_ts
    splus_equal = mean_sp == formula_sp
    balance_equal = mean_sp == mean_lp_minus_mp
    return {
        "n": n,
        "permutations": count,
        "mean_partition_swaps": _fr(mean_ts),
        "mean_partition_swaps_formula": _fr(formula_ts),
        "partition_swaps_equal": swaps_equal,
        "mean_partition_comparisons": _fr(mean_tc),
        "mean_splus": _fr(mean_sp),
        "mean_splus_formula": _fr(formula_sp),
        "splus_equal": splus_equal,
        "mean_lplus_minus_mplus": _fr(mean_lp_minus_mp),
        "splus_balance_equal": balance_equal,
        "passed": bool(swaps_equal and splus_equal and balance_equal),
    }


def exhaustive_partition_distribution(n: int) -> dict[UrnComposition, Fraction]:
    """Exact distribution of the first-partition sublist sizes (i1, i2, i3)."""
    if not 2 <= n <= EXHAUSTIVE_MAX_N:
        raise UsageError(f"exhaustive mode needs 2 <= n <= {EXHAUSTIVE_MAX_N}, got {n}")
    _, dist, count = _exhaustive_partition_kernel(np.int64(n))
    count = int(count)
    out: dict[UrnComposition, Fraction] = {}
    for i1 in range(n - 1):
        for i2 in range(n - 1):
            c = int(dist[i1, i2])
            if c:
                out[UrnComposition(i1, i2, n - 2 - i1 - i2)] = Fraction(c, count)
    return out


# --------------------------------------------------------------------------
# Monte Carlo


def montecarlo_runs(n: int, samples: int, seed: int, variant: str,
                    workers: int = 1) -> np.ndarray:
    """(samples, 2) int64 array of (comparisons, half_swaps) per sorted sample.

    Sample i always uses the substream (seed, i); the worker count only
    affects wall time, never the values.
    """
    code = {"count": 0, "classic": 1}[variant]
    out = np.empty((samples, 2), np.int64)
    if workers <= 1:
        _mc_kernel(np.int64(n), np.int64(0), np.int64(samples), np.int64(seed),
                   np.int64(code), out)
        return out
    spans = np.linspace(0, samples, workers + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = []
        for w in range(workers):
            a, b = int(spans[w]), int(spans[w + 1])
            if a == b:
                continue
            futures.append(pool.submit(
                _mc_kernel, np.int64(n), np.int64(a), np.int64(b), np.int64(seed),
                np.int64(code), out[a:b]))
        for fut in futures:
            fut.result()
    return out


def normalized_costs(runs: np.ndarray, n: int, variant: str) -> np.ndarray:
    """Map raw (comparisons, half_swaps) to ((C - E[C])/n, (S - E[S])/n).

    The dual-pivot variant is centered with the exact means; the classic
    baseline has no exact mean formula here, so it is centered empirically.
    """
    c = runs[:, 0].astype(np.float64)
    s = runs[:, 1].astype(np.float64) / 2.0
    if variant == "count":
        center_c = float(exact_analysis.mean_comparisons_mp(n))
        center_s = float(exact_analysis.mean_swaps_mp(n))
    else:
        center_c = float(c.mean())
        center_s = float(s.mean())
    out = np.empty((runs.shape[0], 2), np.float64)
    out[:, 0] = (c - center_c) / n
    out[:, 1] = (s - center_s) / n
    return out


def _variant_stats(runs: np.ndarray, n: int, variant: str) -> dict:
    est = rde_limit._moment_core(normalized_costs(runs, n, variant))
    c = runs[:, 0].astype(np.float64)
    s = runs[:, 1].astype(np.float64) / 2.0
    stats = {
        "samples": int(runs.shape[0]),
        "mean_comparisons": float(c.mean()),
        "mean_swaps": float(s.mean()),
        "var_c_over_n2": est.var_c,
        "var_s_over_n2": est.var_s,
        "cov_over_n2": est.cov,
        "corr": est.corr,
        "se_var_c": est.se_var_c,
        "se_var_s": est.se_var_s,
        "se_corr": est.se_corr,
    }
    if variant == "count":
        stats["exact_mean_comparisons"] = float(exact_analysis.mean_comparisons_mp(n))
        stats["exact_mean_swaps"] = float(exact_analysis.mean_swaps_mp(n))
        stats["mean_comparisons_deviation"] = stats["mean_comparisons"] - stats["exact_mean_comparisons"]
        stats["mean_swaps_deviation"] = stats["mean_swaps"] - stats["exact_mean_swaps"]
    return stats


def run_montecarlo(config: ExperimentConfig) -> dict:
    """Sort `samples` random permutations per chosen variant and report moments."""
    config.validate()
    if config.n < 100 or config.samples < 100:
        raise UsageError("Monte Carlo mode needs n >= 100 and samples >= 100")
    constants = exact_analysis.analysis_constants()
    report: dict = {"config": config.echo(), "results": {}}
    checks: list[bool] = []
    variants = ("count", "classic") if config.variant == "both" else (config.variant,)
    for variant in variants:
        runs = montecarlo_runs(config.n, config.samples, config.seed, variant,
                               config.workers)
        stats = _variant_stats(runs, config.n, variant)
        if variant == "count":
            targets = {
                "var_c_over_n2": float(constants.sigma2_c),
                "var_s_over_n2": float(constants.sigma2_s),
                "corr": float(constants.corr_limit),
            }
            stats["targets"] = targets
            stats["within_10pct_var"] = bool(
                abs(stats["var_c_over_n2"] - targets["var_c_over_n2"]) <= 0.1 * targets["var_c_over_n2"]
                and abs(stats["var_s_over_n2"] - targets["var_s_over_n2"]) <= 0.1 * targets["var_s_over_n2"])
            stats["corr_within_0.05"] = bool(abs(stats["corr"] - targets["corr"]) <= 0.05)
            checks.extend([stats["within_10pct_var"], stats["corr_within_0.05"]])
        else:
            stats["targets"] = {"corr": -0.864}
            stats["corr_within_0.05"] = bool(abs(stats["corr"] + 0.864) <= 0.05)
            checks.append(stats["corr_within_0.05"])
        report["results"][variant] = stats
    report["passed"] = bool(all(checks))
    return report


def emit_scatter(config: ExperimentConfig) -> dict:
    """Write per-sample normalized cost records for both variants as CSV."""
    config.validate()
    if config.output_path is None:
        raise UsageError("scatter mode requires an output path")
    records: list[RunRecord] = []
    corr: dict[str, float] = {}
    for variant in ("count", "classic"):
        runs = montecarlo_runs(config.n, config.samples, config.seed, variant,
                               config.workers)
        norm = normalized_costs(runs, config.n, variant)
        if config.samples >= 2:
            corr[variant] = float(np.corrcoef(norm[:, 0], norm[:, 1])[0, 1])
        for idx in range(config.samples):
            records.append(RunRecord(variant, config.n, idx,
                                     int(runs[idx, 0]), int(runs[idx, 1]),
                                     float(norm[idx, 0]), float(norm[idx, 1])))
    with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCATTER_HEADER)
        for record in records:
            writer.writerow(record.csv_row())
    return {
        "config": config.echo(),
        "path": config.output_path,
        "data_rows": len(records),
        "corr": corr,
        "passed": True,
    }


# --------------------------------------------------------------------------
# distribution comparison


def ks_distance(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup_t |F_x(t) - F_y(t)|."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    ys = np.sort(np.asarray(y, dtype=np.float64))
    if xs.size == 0 or ys.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / xs.size
    cdf_y = np.searchsorted(ys, grid, side="right") / ys.size
    return float(np.abs(cdf_x - cdf_y).max())


# --------------------------------------------------------------------------
# identity reports


def _closed_prob_l_gt_s(i: int) -> Fraction:
    if i % 2 == 0:
        return Fraction(i, 2 * (i + 1))
    return Fraction(i + 1, 2 * (i + 2))


def _closed_prob_up_l(i: int) -> Fraction:
    if i % 2 == 0:
        return Fraction(i, 4 * (i + 1))
    return Fraction(i + 1, 4 * (i + 2))


def _closed_prob_up_s(i: int) -> Fraction:
    if i % 2 == 0:
        return Fraction(i * (i + 4), 12 * (i + 1) * (i + 3))
    return Fraction(1, 12)


def urn_report(max_step: int = 60, max_n: int = 200) -> dict:
    """Exact verification of the urn identities.

    Checks, as exact rational equalities: uniformity of the composition
    distribution for every step up to max_step, the three joint-probability
    closed forms, the conditional probability 1/2 of growing the leading
    color, and the DP-vs-closed-form match of the expected q-first counts up
    to max_n.
    """
    failures: list[str] = []

    dist = urn_model.initial_distribution()
    for i in range(max_step + 1):
        dist.check()
        target = urn_model.uniform_probability(i)
        if any(p != target for p in dist.table.values()):
            failures.append(f"uniformity fails at step {i}")
        if i < max_step:
            dist = urn_model.dp_step(dist)

    for i in range(1, max_step + 1):
        if urn_model.prob_L_gt_S(i) != _closed_prob_l_gt_s(i):
            failures.append(f"P(L>S) closed form fails at i={i}")
        up_l = urn_model.prob_up_and_L_gt_S(i)
        if up_l != _closed_prob_up_l(i):
            failures.append(f"joint large-up closed form fails at i={i}")
        if urn_model.prob_smallup_and_L_gt_S(i) != _closed_prob_up_s(i):
            failures.append(f"joint small-up closed form fails at i={i}")
        if up_l != urn_model.prob_L_gt_S(i) / 2:
            failures.append(f"conditional probability is not 1/2 at i={i}")

    for n in range(2, max_n + 1):
        dp = urn_model.expected_splus(n)
        if dp != exact_analysis.mean_splus(n):
            failures.append(f"expected_splus mismatch at n={n}")
        if dp != urn_model.expected_lplus_minus_mplus(n):
            failures.append(f"expected_splus != expected L+ - M+ at n={n}")

    return {
        "max_step": max_step,
        "max_n": max_n,
        "checks": 4 * max_step + (max_step + 1) + 2 * (max_n - 1),
        "failures": failures,
        "passed": not failures,
    }


def tollmoments_report(resolution: int = 2000) -> dict:
    """Quadrature toll moments against the closed-form limit constants."""
    constants = exact_analysis.analysis_constants()
    e1, e2 = rde_limit.toll_first_moments(resolution)
    e11, e12, e22 = rde_limit.toll_second_moments(resolution)
    targets = {
        "sigma2_c": float(constants.sigma2_c),
        "sigma2_cs": float(constants.sigma2_cs),
        "sigma2_s": float(constants.sigma2_s),
    }
    values = {
        "sigma2_c": 2 * e11,
        "sigma2_cs": 2 * e12,
        "sigma2_s": 2 * e22,
    }
    errors = {key: abs(values[key] - targets[key]) for key in targets}
    passed = (all(err <= 1e-3 for err in errors.values())
              and abs(e1) <= 1e-6 and abs(e2) <= 1e-6)
    return {
        "resolution": resolution,
        "e_b1": e1,
        "e_b2": e2,
        "e_b1b1": e11,
        "e_b1b2": e12,
        "e_b2b2": e22,
        "doubled": values,
        "targets": targets,
        "abs_errors": errors,
        "centering_within_1e-6": bool(abs(e1) <= 1e-6 and abs(e2) <= 1e-6),
        "passed": bool(passed),
    }


def rde_report(config: ExperimentConfig) -> dict:
    """Sample the limit law and compare moments with the closed-form constants."""
    config.validate()
    constants = exact_analysis.analysis_constants()
    samples = rde_limit.sample_limit_batch(config.seed, config.samples,
                                           config.depth, config.prune_eps)
    est = rde_limit.estimate_moments(samples)
    mean_c = float(samples[:, 0].mean())
    mean_s = float(samples[:, 1].mean())
    se_mean_c = math.sqrt(est.var_c / est.n)
    se_mean_s = math.sqrt(est.var_s / est.n)
    sigma2_c = float(constants.sigma2_c)
    sigma2_s = float(constants.sigma2_s)
    corr_limit = float(constants.corr_limit)
    checks = {
        "means_within_3se": bool(abs(mean_c) <= 3 * se_mean_c
                                 and abs(mean_s) <= 3 * se_mean_s),
        "var_c_within_5pct": bool(abs(est.var_c - sigma2_c) <= 0.05 * sigma2_c),
        "var_s_within_5pct": bool(abs(est.var_s - sigma2_s) <= 0.05 * sigma2_s),
        "corr_within_0.05": bool(abs(est.corr - corr_limit) <= 0.05),
    }
    return {
        "config": config.echo(),
        "mean_c": mean_c,
        "mean_s": mean_s,
        "se_mean_c": se_mean_c,
        "se_mean_s": se_mean_s,
        "var_c": est.var_c,
        "var_s": est.var_s,
        "cov": est.cov,
        "corr": est.corr,
        "targets": {"sigma2_c": sigma2_c, "sigma2_s": sigma2_s, "corr": corr_limit},
        "checks": checks,
        "passed": bool(all(checks.values())),
    }
