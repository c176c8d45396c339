import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landmark_sampling.oracles import (
    enumerate_fixed_size_rowcounts,
    enumerate_subset_rowcounts,
    monte_carlo_bias,
    rowcount_identity,
    vandermonde_rowcount,
)
from landmark_sampling.panel import MonthDate
from landmark_sampling.samplers import SamplerConfig
from landmark_sampling.synth import SynthConfig, synthetic_panel


def test_subset_rowcount_examples():
    assert enumerate_subset_rowcounts(1) == [Fraction(1, 2)]
    three = enumerate_subset_rowcounts(3)
    assert three[1] == 1 and three[1] * 8 == 8
    for n in (1, 5, 12, 16):
        assert enumerate_subset_rowcounts(n)[-1] == Fraction(n, 2)
    with pytest.raises(ValueError):
        enumerate_subset_rowcounts(21)
    with pytest.raises(ValueError):
        enumerate_subset_rowcounts(0)


def test_subset_rowcounts_against_loops():
    n = 6
    totals = [0] * n
    for mask in range(1 << n):
        for i in range(n):
            totals[i] += sum(1 for j in range(i + 1) if mask >> j & 1)
    assert enumerate_subset_rowcounts(n) == [Fraction(t, 1 << n) for t in totals]


def test_rowcount_identity_examples():
    r = rowcount_identity(2)
    assert r.lhs == 0 * 1 + 1 * 2 + 2 * 1 == 4 == r.rhs
    assert rowcount_identity(1).lhs == 1 == rowcount_identity(1).rhs
    assert rowcount_identity(10).lhs == 5120 == rowcount_identity(10).rhs
    big = rowcount_identity(500)
    assert big.equal and big.rhs == 500 * 2**499
    with pytest.raises(ValueError):
        rowcount_identity(0)


def test_vandermonde_examples():
    v = vandermonde_rowcount(5, 2, 3)
    assert v.lhs == 6 + 6 + 0 == 12 == v.rhs == 3 * math.comb(4, 1)
    assert v.expected_count == Fraction(12, 10) == v.mp
    assert vandermonde_rowcount(9, 9, 4).expected_count == 4
    assert vandermonde_rowcount(9, 3, 1).expected_count == Fraction(3, 9)
    with pytest.raises(ValueError):
        vandermonde_rowcount(5, 6, 1)
    with pytest.raises(ValueError):
        vandermonde_rowcount(5, 2, 0)


@settings(max_examples=300)
@given(st.integers(1, 60).flatmap(lambda M: st.tuples(st.just(M), st.integers(1, M), st.integers(1, M))))
def test_vandermonde_property(Mnm):
    assert vandermonde_rowcount(*Mnm).holds


def test_fixed_size_examples():
    assert enumerate_fixed_size_rowcounts(5, 2)[2] == Fraction(6, 5)
    assert enumerate_fixed_size_rowcounts(4, 1)[1] == Fraction(1, 2)
    assert enumerate_fixed_size_rowcounts(7, 7) == list(range(1, 8))
    with pytest.raises(ValueError):
        enumerate_fixed_size_rowcounts(40, 20)


def test_fixed_size_against_direct_count():
    M, n = 7, 3
    totals = [0] * M
    for subset in itertools.combinations(range(M), n):
        for m in range(M):
            totals[m] += sum(1 for j in subset if j <= m)
    assert enumerate_fixed_size_rowcounts(M, n) == [Fraction(t, math.comb(M, n)) for t in totals]


def test_census_has_no_bias():
    panel = synthetic_panel(SynthConfig.spread(100, 6, n_months=24, seed=3))
    L = MonthDate(2010, 6)
    rep = monte_carlo_bias(panel, SamplerConfig("vertical", p=1), 100, seed=1, landmark=L, horizon=12)
    assert rep.cells and all(c.bias == 0 and c.se == 0 for c in rep.cells)
    assert rep.pass_fraction() == 1 and not rep.inconclusive


def test_mostly_empty_samples_are_flagged():
    panel = synthetic_panel(SynthConfig(cohort_sizes=[2], n_months=12, seed=1))
    rep = monte_carlo_bias(panel, SamplerConfig("horizontal", p=0.1), 100, seed=1, landmark=MonthDate(2010, 3), horizon=6)
    assert rep.inconclusive


def test_replication_minimum():
    panel = synthetic_panel(SynthConfig(cohort_sizes=[5], n_months=6))
    with pytest.raises(ValueError):
        monte_carlo_bias(panel, SamplerConfig("vertical"), 99, seed=0, landmark=MonthDate(2010, 1))


def test_threads_do_not_change_report():
    panel = synthetic_panel(SynthConfig.spread(100, 6, n_months=24, seed=3))
    cfg = SamplerConfig("single")
    a = monte_carlo_bias(panel, cfg, 200, seed=5, landmark=MonthDate(2010, 6), horizon=12, threads=1)
    b = monte_carlo_bias(panel, cfg, 200, seed=5, landmark=MonthDate(2010, 6), horizon=12, threads=3)
    assert a.cells == b.cells


def test_vertical_unbiased_on_200_individuals():
    # 10,000 replications; the run itself is the oracle
    panel = synthetic_panel(SynthConfig.spread(200, 12, n_months=36, seed=2024))
    rep = monte_carlo_bias(panel, SamplerConfig("vertical", p=0.2), 10_000, seed=2024, landmark=MonthDate(2010, 12), horizon=24)
    worst = max(abs(c.bias) / c.se for c in rep.cells if c.se > 0)
    print(f"vertical 200 individuals: {len(rep.cells)} cells, worst |bias|/SE = {worst:.2f}")
    assert all(c.within(3) for c in rep.cells)
