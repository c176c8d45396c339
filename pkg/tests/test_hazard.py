import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landmark_sampling.dasd import expand_multiplicity, materialize_dasd
from landmark_sampling.hazard import (
    aligned_hazards,
    error_report,
    fpc_variance,
    hazard_variance,
    mae,
    rmse,
    se_with_fpc,
    weighted_hazard,
    window_hazard,
)
from landmark_sampling.panel import EventType, IndividualHistory, MonthDate, monthly_hazard_original, validate_panel
from landmark_sampling.samplers import ProgressiveWeightTable, SamplerConfig, sample_backward, sample_single

from conftest import panels

JAN = MonthDate(2001, 1)


def test_full_dasd_hazard_equals_original(illustration):
    a = weighted_hazard(materialize_dasd(illustration))
    b = monthly_hazard_original(illustration)
    assert a.keys == b.keys
    assert np.array_equal(a.hazards, b.hazards)


@settings(max_examples=60, deadline=None)
@given(panels(common_entry=True))
def test_full_dasd_hazard_equals_original_common_entry(panel):
    a = weighted_hazard(materialize_dasd(panel))
    b = monthly_hazard_original(panel)
    assert a.keys == b.keys
    for k in range(len(a)):
        for ev in range(4):
            # same rational, since every count at a date is scaled by the same t
            assert Fraction(a.mass[k, ev]) / Fraction(a.at_risk_mass[k]) == Fraction(b.mass[k, ev]) / Fraction(b.at_risk_mass[k])


def test_single_one_individual():
    panel = validate_panel([IndividualHistory("a", JAN, JAN + 2, EventType.REO)], JAN + 2)
    for seed in range(200):
        s = sample_single(panel, seed=seed)
        if len(s) == 3:
            break
    assert np.all(s.weight == 3)
    hz = weighted_hazard(s)
    assert set(hz.hazards.ravel().tolist()) <= {0.0, 1.0}
    assert hz.hazard(JAN + 2, EventType.REO) == 1


def test_backward_census_window_equals_original(staggered):
    s = sample_backward(staggered, weight_table=ProgressiveWeightTable.census(), seed=0)
    first, last = staggered.span
    for L in range(last - first + 1):
        a = weighted_hazard(s, first + L, last - first + 1 - L)
        b = window_hazard(staggered, first + L, last - first + 1 - L)
        assert a.keys == b.keys and np.array_equal(a.hazards, b.hazards)


def test_mae_rmse_examples():
    assert mae([0.1, 0.3], [0.1, 0.3]) == 0 and rmse([0.1, 0.3], [0.1, 0.3]) == 0
    assert mae([0.2, 0.3], [0.1, 0.3]) == pytest.approx(0.05)
    assert rmse([0.2, 0.3], [0.1, 0.3]) == pytest.approx(math.sqrt(0.005))
    assert rmse([0.2, 0.3], [0.1, 0.3]) == pytest.approx(0.0707, abs=1e-4)
    with pytest.raises(ValueError):
        mae([], [])
    with pytest.raises(ValueError):
        rmse([0.1], [0.1, 0.2])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(-0.5, 0.5))
def test_constant_offset(ref, delta):
    got = [r + delta for r in ref]
    assert mae(got, ref) == pytest.approx(abs(delta), abs=1e-12)
    assert rmse(got, ref) == pytest.approx(abs(delta), abs=1e-12)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=30))
def test_mae_not_above_rmse(pairs):
    a, b = zip(*pairs)
    assert mae(a, b) <= rmse(a, b) + 1e-15


def test_missing_sample_dates_count_as_zero(illustration):
    ref = window_hazard(illustration, JAN, 6)
    empty = window_hazard(illustration, MonthDate(2005, 1), 3)
    got, want = aligned_hazards(empty, ref, EventType.REO)
    assert got.tolist() == [0.0] * len(ref)
    rep = error_report(empty, ref, JAN, 6)
    assert rep[EventType.REO].mae == pytest.approx(np.mean(want))
    with pytest.raises(ValueError):
        aligned_hazards(ref, empty, EventType.REO)


def test_error_report_zero_for_census(staggered):
    L = staggered.span[0] + 5
    s = SamplerConfig("vertical", p=1).sample(staggered)
    rep = error_report(window_hazard(s, L, 10), window_hazard(staggered, L, 10), L, 10)
    for ev in list(EventType)[:4]:
        assert rep[ev].mae == 0 and rep[ev].rmse == 0 and rep[ev].n_dates == 10


@settings(max_examples=40, deadline=None)
@given(panels(), st.integers(0, 2**32), st.sampled_from([0.5, 3.0, 1e-3, 1e6]))
def test_weight_scale_invariance(panel, seed, c):
    s = SamplerConfig("backward", seed=seed, weight_table=ProgressiveWeightTable.default().scaled(200)).sample(panel)
    scaled = replace(s, weight=s.weight * c)
    a, b = weighted_hazard(s), weighted_hazard(scaled)
    assert a.keys == b.keys
    assert np.allclose(a.hazards, b.hazards, rtol=1e-12, atol=0)


@settings(max_examples=40, deadline=None)
@given(panels(), st.integers(0, 2**32))
def test_multiplicity_expansion_invariance(panel, seed):
    s = SamplerConfig("backward", seed=seed, weight_table=ProgressiveWeightTable.default().scaled(200)).sample(panel)
    e = expand_multiplicity(s)
    a, b = weighted_hazard(s), weighted_hazard(e)
    assert a.keys == b.keys and np.allclose(a.hazards, b.hazards, rtol=1e-12, atol=0)
    first, last = panel.span
    for L in range(0, last - first + 1, 3):
        H = last - first + 1 - L
        wa, wb = weighted_hazard(s, first + L, H), weighted_hazard(e, first + L, H)
        assert wa.keys == wb.keys and np.allclose(wa.hazards, wb.hazards, rtol=1e-12, atol=0)


def _population_variance(xs):
    mu = Fraction(sum(xs), len(xs))
    return sum((x - mu) ** 2 for x in xs) / len(xs)


def test_hazard_variance_examples():
    assert hazard_variance(0.5) == 0.25
    assert hazard_variance(0) == 0 and hazard_variance(1) == 0
    assert hazard_variance(Fraction(1, 3)) == Fraction(2, 9) == _population_variance([1, 0, 0])
    with pytest.raises(ValueError):
        hazard_variance(1.5)


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_hazard_variance_matches_enumeration(nk):
    n, k = nk
    assert hazard_variance(Fraction(k, n)) == _population_variance([1] * k + [0] * (n - k))


def test_fpc_examples():
    assert fpc_variance(0.25, 100, 0.2) == pytest.approx(0.002)
    assert se_with_fpc(0.25, 100, 0.2) == pytest.approx(0.04472, abs=1e-5)
    assert se_with_fpc(0.25, 100, 1) == 0
    assert se_with_fpc(0, 10, 0.3) == 0
    assert fpc_variance(Fraction(1, 4), 100, Fraction(1, 5)) == Fraction(1, 500)
    with pytest.raises(ValueError):
        se_with_fpc(0.25, 0, 0.5)
    with pytest.raises(ValueError):
        se_with_fpc(0.25, 10, 0)
