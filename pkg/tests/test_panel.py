from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from landmark_sampling.panel import (
    EmptyPanelError,
    EventType,
    IndividualHistory,
    MonthDate,
    PanelValidationError,
    monthly_hazard_original,
    size_table,
    validate_panel,
)

from conftest import panels

JAN = MonthDate(2001, 1)


def test_month_date_parse_and_arithmetic():
    assert MonthDate.parse("2001-04") == MonthDate(2001, 4)
    assert MonthDate.parse("200104") == MonthDate(2001, 4)
    assert MonthDate.parse("04/2001") == MonthDate(2001, 4)
    assert MonthDate.parse("Apr-2001") == MonthDate(2001, 4)
    assert str(MonthDate(2001, 4)) == "2001-04"
    assert MonthDate(2001, 11) + 3 == MonthDate(2002, 2)
    assert MonthDate(2002, 2) - MonthDate(2001, 11) == 3
    assert MonthDate(2002, 2) - 3 == MonthDate(2001, 11)
    assert MonthDate.from_index(MonthDate(1999, 12).index) == MonthDate(1999, 12)
    with pytest.raises(ValueError):
        MonthDate(2001, 13)
    with pytest.raises(ValueError):
        MonthDate.parse("2001-4x")


def test_event_type_labels_round_trip():
    for ev in EventType:
        assert EventType.parse(ev.label) is ev
    assert EventType.parse("charge off") is EventType.CHARGEOFF


def test_illustration_is_valid(illustration):
    assert len(illustration) == 4
    assert illustration.censor_date == MonthDate(2001, 6)
    assert illustration.span == (JAN, MonthDate(2001, 6))
    assert list(illustration.survival_time) == [6, 4, 6, 3]


def test_single_one_month_record():
    p = validate_panel([IndividualHistory("a", JAN, JAN)], JAN)
    assert p.individuals[0].terminal is EventType.SURVIVAL
    assert p.individuals[0].survival_time == 1


def test_validation_reports_each_problem():
    with pytest.raises(PanelValidationError) as info:
        validate_panel(
            [
                IndividualHistory("a", MonthDate(2001, 3), JAN),
                IndividualHistory("b", JAN, MonthDate(2001, 9)),
                IndividualHistory("c", JAN, JAN),
                IndividualHistory("c", JAN, JAN),
            ],
            censor_date=MonthDate(2001, 6),
        )
    reasons = {(i.id, i.reason) for i in info.value.issues}
    assert ("a", "entry after last") in reasons
    assert ("b", "last after censor date") in reasons
    assert ("c", "duplicate id") in reasons


def test_empty_panel_rejected():
    with pytest.raises(EmptyPanelError):
        validate_panel([])


def test_size_table_matches_illustration(illustration):
    st = size_table(illustration)
    assert [str(d) for d in st.dates] == [f"2001-0{m}" for m in range(1, 7)]
    events = st.counts[:, :4].sum(axis=1)
    assert list(events) == [0, 0, 0, 1, 0, 1]
    assert list(st.total) == [4, 4, 4, 3, 2, 2]
    assert st.row(MonthDate(2001, 4)) == {
        EventType.REO: 1,
        EventType.CHARGEOFF: 0,
        EventType.PAYOFF: 0,
        EventType.OTHERS: 0,
        EventType.SURVIVAL: 2,
    }
    assert st.row(JAN)[EventType.SURVIVAL] == 4


def test_size_table_one_month_censored():
    st = size_table(validate_panel([IndividualHistory("x", JAN, JAN)], JAN))
    assert st.row(JAN)[EventType.SURVIVAL] == 1 and int(st.total[0]) == 1


def test_original_hazard_illustration(illustration):
    hz = monthly_hazard_original(illustration)
    assert [hz.hazard(MonthDate(2001, m)) for m in range(1, 7)] == [0, 0, 0, 1 / 3, 0, 0.5]
    assert hz.hazard(MonthDate(2001, 4), EventType.REO) == pytest.approx(0.3333, abs=1e-4)


def test_no_event_panel_has_zero_hazard():
    p = validate_panel([IndividualHistory(str(k), JAN + k, JAN + 5) for k in range(4)], JAN + 5)
    assert not monthly_hazard_original(p).hazards.any()


@settings(max_examples=150, deadline=None)
@given(panels())
def test_size_table_invariants(panel):
    st = size_table(panel)
    # total equals direct interval counting
    for k, d in enumerate(st.dates):
        assert int(st.total[k]) == panel.at_risk(d)
        assert int(st.counts[k].sum()) == int(st.total[k])
    for ev in EventType:
        if ev is not EventType.SURVIVAL:
            assert int(st.counts[:, ev].sum()) == int((panel.terminal == ev).sum())
    hz = monthly_hazard_original(panel)
    assert np.all(hz.hazards.sum(axis=1) <= 1 + 1e-12)
    assert np.all(hz.event_mass.sum(axis=1) <= hz.at_risk_mass)


@settings(max_examples=100, deadline=None)
@given(panels(common_entry=True))
def test_offset_and_date_alignment_agree_for_common_entry(panel):
    by_date = monthly_hazard_original(panel, "date")
    by_offset = monthly_hazard_original(panel, "offset")
    entry = MonthDate.from_index(int(panel.entry.min()))
    assert [k - entry + 1 for k in by_date.keys] == list(by_offset.keys)
    assert np.array_equal(by_date.mass, by_offset.mass)


def test_super_size(illustration):
    assert illustration.super_size == 58
    assert Fraction(illustration.super_size) == sum(Fraction(s * (s + 1), 2) for s in illustration.survival_time)
