import math
from fractions import Fraction

import pytest

from hybridsat.cnf import count_solutions, generate_random
from hybridsat.experiments import (
    absorbing_success,
    fig6,
    fig6_bins,
    fig7,
    markov_vs_empirical,
    pmap,
    t0_bin,
)
from hybridsat.markov import z_walk_success


def square(x):
    return x * x


def test_pmap_preserves_order_across_worker_counts():
    assert pmap(square, range(7), 1) == pmap(square, range(7), 2) == [i * i for i in range(7)]


def test_t0_bins():
    assert [t0_bin(t) for t in (1, 2, 3, 4, 7, 8, 15, 16)] == ["1", "2-3", "2-3", "4-7", "4-7", "8-15", "8-15", "16-31"]


def test_fig6_rows_are_consistent():
    rows = fig6(10, 12, seed=5)
    assert [r["index"] for r in rows] == list(range(12))
    for r in rows:
        f = generate_random(10, 46, r["formula_seed"])
        assert r["t0"] == count_solutions(f)
        if r["t0"]:
            assert 0.0 < r["oracle_fraction"] <= 1.0
            assert r["rate"] == pytest.approx(-math.log2(r["oracle_fraction"]) / 20, abs=1e-12)
        else:
            assert r["rate"] == math.inf
    assert fig6(10, 12, seed=5) == rows
    assert fig6(10, 12, seed=5, workers=2) == rows


def test_fig6_bins_summaries():
    rows = [{"t0": t, "rate": r} for t, r in [(1, 0.3), (1, 0.1), (2, 0.2), (3, 0.4), (0, math.inf)]]
    bins = fig6_bins(rows)
    assert [b["t0_bin"] for b in bins] == ["1", "2-3"]
    assert bins[0]["count"] == 2 and bins[0]["median_rate"] == pytest.approx(0.2)
    assert bins[1]["mean_rate"] == pytest.approx(0.3)


@pytest.mark.slow
def test_fig6_rate_falls_with_solution_count():
    bins = fig6_bins(fig6(14, 400, seed=0))
    medians = [b["median_rate"] for b in bins]
    assert len(medians) >= 3
    assert all(a >= b for a, b in zip(medians, medians[1:]))


def test_fig7_slope_near_minus_one():
    rows, meta = fig7(40, 8, 10_000, seed=0)
    assert [r["h"] for r in rows] == list(range(9))
    assert rows[0]["estimate"] == 1.0
    assert abs(meta["slope"] + 1) <= 0.15


def test_absorbing_success_exact_and_float():
    exact = absorbing_success(6, 6, exact=True)
    assert isinstance(exact, Fraction)
    assert float(exact) == pytest.approx(absorbing_success(6, 6), rel=1e-12)
    assert exact >= z_walk_success(6, 6, exact=True)


def test_markov_vs_empirical_rows_exceed_bound():
    rows = markov_vs_empirical(10, 10, 8, 4000, seed=3)
    assert len(rows) == 8
    for r in rows:
        assert r["absorbing"] >= r["z_walk_bound"]
        assert r["empirical"] + 3 * r["stderr"] >= r["z_walk_bound"]
    assert markov_vs_empirical(10, 10, 8, 4000, seed=3, workers=2) == rows
