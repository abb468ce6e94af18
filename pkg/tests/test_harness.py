"""Harness drivers: exhaustive reports, Monte Carlo plumbing, emitters."""

import csv
import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats

from dpqcount import harness
from dpqcount.harness import (
    ExperimentConfig,
    PermutationIterator,
    UsageError,
    emit_scatter,
    ks_distance,
    montecarlo_runs,
    normalized_costs,
    permutation_census,
    run_exhaustive,
    run_exhaustive_partition,
    run_montecarlo,
)
from dpqcount.sort_core import sort_count


def test_permutation_iterator_lexicographic():
    assert list(PermutationIterator(3)) == [
        (1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]
    assert len(PermutationIterator(5)) == 120
    assert list(PermutationIterator(0)) == [()]


def test_jitted_enumeration_matches_python_oracle():
    # the in-kernel lexicographic enumeration and per-permutation sort costs
    # agree with a plain python loop over itertools.permutations
    n = 5
    total_c = total_h = 0
    for perm in PermutationIterator(n):
        a = np.array(perm, dtype=np.int64)
        profile = sort_count(a)
        total_c += profile.comparisons
        total_h += profile.half_swaps
    kernel_c, kernel_h, count = harness._exhaustive_sort_kernel(n)
    assert (int(kernel_c), int(kernel_h), int(count)) == (total_c, total_h, 120)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_run_exhaustive_flags(n):
    report = run_exhaustive(n)
    assert report["passed"] is True
    assert report["comparisons_equal"] is True
    assert report["half_swaps_equal"] is True
    assert report["permutations"] == math.factorial(n)


def test_run_exhaustive_small_values():
    report = run_exhaustive(2)
    assert report["mean_comparisons"] == "1/1"
    assert report["mean_swaps"] == "2/1"


def test_run_exhaustive_domain():
    with pytest.raises(UsageError):
        run_exhaustive(1)
    with pytest.raises(UsageError):
        run_exhaustive(11)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_run_exhaustive_partition_flags(n):
    report = run_exhaustive_partition(n)
    assert report["passed"] is True, report
    assert report["partition_swaps_equal"] and report["splus_equal"]
    assert report["splus_balance_equal"]


def test_run_exhaustive_partition_values():
    assert run_exhaustive_partition(2)["mean_partition_swaps"] == "2/1"
    assert run_exhaustive_partition(2)["mean_splus"] == "0/1"
    assert run_exhaustive_partition(3)["mean_partition_swaps"] == "8/3"
    assert run_exhaustive_partition(4)["mean_splus"] == "1/12"


def test_montecarlo_worker_invariance():
    lone = montecarlo_runs(500, 300, 123, "count", workers=1)
    multi = montecarlo_runs(500, 300, 123, "count", workers=3)
    assert np.array_equal(lone, multi)
    lone = montecarlo_runs(300, 250, 9, "classic", workers=1)
    multi = montecarlo_runs(300, 250, 9, "classic", workers=4)
    assert np.array_equal(lone, multi)


def test_montecarlo_determinism():
    a = montecarlo_runs(200, 150, 5, "count")
    b = montecarlo_runs(200, 150, 5, "count")
    assert np.array_equal(a, b)


def test_normalized_costs_centering():
    runs = montecarlo_runs(1000, 1200, 3, "count")
    norm = normalized_costs(runs, 1000, "count")
    # exact centering: the empirical mean sits within a few standard errors
    se_c = norm[:, 0].std(ddof=1) / math.sqrt(norm.shape[0])
    assert abs(norm[:, 0].mean()) < 5 * se_c
    classic = montecarlo_runs(1000, 1200, 3, "classic")
    norm_classic = normalized_costs(classic, 1000, "classic")
    assert abs(norm_classic[:, 0].mean()) < 1e-12
    assert abs(norm_classic[:, 1].mean()) < 1e-12


def test_run_montecarlo_report_shape():
    config = ExperimentConfig(subcommand="mc", n=300, samples=400, seed=1,
                              variant="count")
    report = run_montecarlo(config)
    stats = report["results"]["count"]
    assert stats["samples"] == 400
    assert "mean_comparisons_deviation" in stats
    assert stats["targets"]["var_c_over_n2"] == pytest.approx(0.2416911, abs=1e-6)
    # a deviation of the empirical mean from the exact mean beyond a few
    # standard errors would indicate a cost-accounting bug
    se = math.sqrt(stats["var_c_over_n2"] / 400) * 300
    assert abs(stats["mean_comparisons_deviation"]) < 5 * se


def test_run_montecarlo_validation():
    with pytest.raises(UsageError):
        run_montecarlo(ExperimentConfig(subcommand="mc", n=50, samples=500))
    with pytest.raises(UsageError):
        run_montecarlo(ExperimentConfig(subcommand="mc", n=500, samples=50))
    with pytest.raises(UsageError):
        run_montecarlo(ExperimentConfig(subcommand="mc", n=500, samples=500,
                                        variant="fast"))


def test_run_montecarlo_reproducible():
    config = ExperimentConfig(subcommand="mc", n=200, samples=300, seed=8,
                              variant="classic")
    assert run_montecarlo(config) == run_montecarlo(config)


def test_emit_scatter_contract(tmp_path):
    out = tmp_path / "scatter.csv"
    config = ExperimentConfig(subcommand="scatter", n=1000, samples=400, seed=2,
                              output_path=str(out))
    report = emit_scatter(config)
    assert report["data_rows"] == 800
    with open(out, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == harness.SCATTER_HEADER
    assert len(rows) == 801
    by_variant = {"count": [], "classic": []}
    for row in rows[1:]:
        variant, n, idx, comparisons, half_swaps, norm_c, norm_s = row
        assert int(n) == 1000
        record = (float(norm_c), float(norm_s))
        assert all(math.isfinite(v) for v in record)
        by_variant[variant].append(record)
    assert len(by_variant["count"]) == 400
    # recomputed from the emitted file: positive association for the
    # dual-pivot costs, strongly negative for the classic baseline
    for variant, expected_sign in (("count", 1.0), ("classic", -1.0)):
        arr = np.array(by_variant[variant])
        corr = np.corrcoef(arr[:, 0], arr[:, 1])[0, 1]
        assert math.copysign(1.0, corr) == expected_sign, (variant, corr)


def test_emit_scatter_default_config_row_count(tmp_path):
    # the stock configuration emits 1000 samples per variant at n = 10^4
    out = tmp_path / "default.csv"
    config = ExperimentConfig(subcommand="scatter", output_path=str(out))
    assert (config.n, config.samples) == (10_000, 1000)
    report = emit_scatter(config)
    assert report["data_rows"] == 2000
    with open(out, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    assert len(lines) == 2001
    assert lines[0] == ",".join(harness.SCATTER_HEADER)
    assert report["corr"]["count"] > 0 > report["corr"]["classic"]


def test_emit_scatter_single_sample(tmp_path):
    out = tmp_path / "one.csv"
    config = ExperimentConfig(subcommand="scatter", n=500, samples=1, seed=4,
                              output_path=str(out))
    report = emit_scatter(config)
    assert report["data_rows"] == 2
    with open(out, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3
    for row in rows[1:]:
        assert math.isfinite(float(row[5])) and math.isfinite(float(row[6]))


def test_emit_scatter_reproducible_bytes(tmp_path):
    config_a = ExperimentConfig(subcommand="scatter", n=300, samples=50, seed=6,
                                output_path=str(tmp_path / "a.csv"))
    config_b = ExperimentConfig(subcommand="scatter", n=300, samples=50, seed=6,
                                output_path=str(tmp_path / "b.csv"))
    emit_scatter(config_a)
    emit_scatter(config_b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_scatter_requires_output():
    with pytest.raises(UsageError):
        emit_scatter(ExperimentConfig(subcommand="scatter", n=100, samples=10))


def test_ks_distance_basics():
    x = np.arange(100, dtype=float)
    assert ks_distance(x, x) == 0.0
    assert ks_distance(np.zeros(10), np.ones(10)) == 1.0
    rng = np.random.default_rng(0)
    a = rng.normal(size=400)
    b = rng.normal(0.3, 1.0, size=300)
    ours = ks_distance(a, b)
    reference = scipy.stats.ks_2samp(a, b, method="asymp").statistic
    assert ours == pytest.approx(reference, abs=1e-12)
    with pytest.raises(ValueError):
        ks_distance(np.array([]), np.ones(3))


def test_permutation_census_uniformity():
    # chi-square over all 24 permutations of n=4 with 10^6 draws; the critical
    # value is taken at the 1e-6 significance level
    draws = 1_000_000
    counts = permutation_census(4, draws, seed=0)
    assert counts.sum() == draws
    expected = draws / 24.0
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    critical = scipy.stats.chi2.ppf(1 - 1e-6, df=23)
    assert chi2 < critical, (chi2, critical)


def test_urn_report_small():
    report = harness.urn_report(max_step=20, max_n=40)
    assert report["passed"] is True
    assert report["failures"] == []


def test_tollmoments_report():
    report = harness.tollmoments_report(1000)
    assert report["passed"] is True
    assert report["centering_within_1e-6"] is True
    assert report["abs_errors"]["sigma2_c"] < 1e-3


def test_rde_report_structure_and_determinism():
    config = ExperimentConfig(subcommand="rde", samples=2000, seed=3, depth=18)
    report = harness.rde_report(config)
    assert set(report["checks"]) == {"means_within_3se", "var_c_within_5pct",
                                     "var_s_within_5pct", "corr_within_0.05"}
    assert report == harness.rde_report(config)
    assert json.dumps(report, sort_keys=True)  # json-serializable


def test_config_validation():
    with pytest.raises(UsageError):
        ExperimentConfig(subcommand="exhaustive", n=11).validate()
    with pytest.raises(UsageError):
        ExperimentConfig(subcommand="exhaustive", n=1).validate()
    with pytest.raises(UsageError):
        ExperimentConfig(output_format="xml").validate()
    with pytest.raises(UsageError):
        ExperimentConfig(workers=0).validate()
    with pytest.raises(UsageError):
        ExperimentConfig(seed=-1).validate()
    with pytest.raises(UsageError):
        ExperimentConfig(subcommand="rde", prune_eps=1.0).validate()
    ExperimentConfig(subcommand="exhaustive", n=10).validate()


def test_exhaustive_partition_distribution_is_exact():
    dist = harness.exhaustive_partition_distribution(4)
    assert sum(dist.values(), Fraction(0)) == 1
    assert all(p == Fraction(1, 6) for p in dist.values())
    assert len(dist) == 6
