import io

import pytest
from hypothesis import given, settings

from landmark_sampling.ingest import (
    FREDDIE_MAC_PRESET,
    CleaningReport,
    ObservationRow,
    SchemaConfig,
    UnknownEventCodeError,
    clean_panel,
    load_schema,
    panel_to_rows,
    parse_performance_file,
    write_performance_file,
)
from landmark_sampling.panel import EventType, MonthDate

from conftest import panels


def _line(loan, yyyymm, age, code=""):
    return f"{loan}|{yyyymm}|100000.00|0|{age}|300|0|0|{code}|\n"


def _parse(text, schema=FREDDIE_MAC_PRESET):
    issues = []
    rows = list(parse_performance_file(io.StringIO(text), schema, issues))
    return rows, issues


def test_three_line_fixture():
    rows, issues = _parse(_line("F1", "201001", 0) + _line("F1", "201002", 1) + _line("F1", "201003", 2))
    assert [(r.id, str(r.date), r.loan_age, r.event) for r in rows] == [
        ("F1", "2010-01", 0, None),
        ("F1", "2010-02", 1, None),
        ("F1", "2010-03", 2, None),
    ]
    assert issues == []


def test_malformed_rows_skipped_with_line_numbers():
    text = _line("F1", "201001", 0) + "F1|201002|1|0|abc|300|0|0||\n" + "short|row\n" + _line("F1", "2010x3", 2)
    rows, issues = _parse(text)
    assert len(rows) == 1
    assert [i.line for i in issues] == [2, 3, 4]
    assert "loan age" in issues[0].reason


def test_empty_file():
    rows, issues = _parse("")
    assert rows == [] and issues == []


def test_unknown_code_is_fatal():
    with pytest.raises(UnknownEventCodeError, match="'77'"):
        _parse(_line("F1", "201001", 0, "77"))


def test_payoff_loan_kept():
    text = "".join(_line("A", f"20100{m + 1}", m) for m in range(4)) + _line("A", "201005", 4, "01")
    panel, rep = clean_panel(parse_performance_file(io.StringIO(text)))
    (ind,) = panel.individuals
    assert ind.terminal is EventType.PAYOFF
    assert ind.survival_time == 5
    assert rep.individuals_kept == 1 and rep.rows_read == 5


def test_payoff_on_fourth_month():
    text = "".join(_line("A", f"20100{m + 1}", m) for m in range(3)) + _line("A", "201004", 3, "01")
    panel, _ = clean_panel(parse_performance_file(io.StringIO(text)))
    assert panel.individuals[0].survival_time == 4


def test_cleaning_drops():
    text = (
        _line("late", "201001", 5)
        + _line("late", "201002", 6)
        + _line("gap", "201001", 0)
        + _line("gap", "201002", 1)
        + _line("gap", "201004", 3)
        + _line("twice", "201001", 0, "01")
        + _line("twice", "201002", 1, "09")
        + _line("early", "201001", 0, "03")
        + _line("early", "201002", 1)
        + _line("ok", "201001", 0)
        + _line("ok", "201002", 1, "09")
    )
    panel, rep = clean_panel(parse_performance_file(io.StringIO(text)))
    assert rep.individuals_dropped_nonzero_start == 1
    assert rep.individuals_dropped_gap == 1
    assert rep.individuals_dropped_ambiguous_terminal == 2
    assert rep.individuals_kept == 1
    assert rep.individuals_seen == 5
    assert rep.rows_read == 11
    assert panel.ids == ("ok",)
    assert panel.individuals[0].terminal is EventType.REO


def test_interleaved_ids_accepted():
    text = _line("a", "201001", 0) + _line("b", "201001", 0) + _line("a", "201002", 1) + _line("b", "201002", 1, "01")
    panel, rep = clean_panel(parse_performance_file(io.StringIO(text)))
    assert rep.individuals_kept == 2
    assert [i.terminal for i in panel.individuals] == [EventType.SURVIVAL, EventType.PAYOFF]


def test_censor_date_truncates():
    text = "".join(_line("a", f"20100{m + 1}", m) for m in range(5)) + _line("a", "201006", 5, "01")
    panel, rep = clean_panel(parse_performance_file(io.StringIO(text)), MonthDate(2010, 3))
    assert panel.individuals[0].last == MonthDate(2010, 3)
    assert panel.individuals[0].terminal is EventType.SURVIVAL
    assert rep.rows_after_censor == 3 and rep.rows_read == 3


def test_reports_merge():
    a = CleaningReport(rows_read=3, individuals_kept=1)
    b = CleaningReport(rows_read=2, individuals_dropped_gap=1)
    c = a + b
    assert c.rows_read == 5 and c.individuals_seen == 2
    assert (a + b) + c == a + (b + c)
    assert "individuals_seen=2" in c.as_text()


def test_schema_file(tmp_path):
    cfg = tmp_path / "schema.ini"
    cfg.write_text(
        "[schema]\ndelimiter = comma\nid_column = 0\ndate_column = 1\nage_column = 2\nevent_column = 3\n"
        "date_format = %Y-%m\nheader = yes\n[event_codes]\nP = Payoff\nD = REO\n"
    )
    schema = load_schema(cfg)
    assert schema.delimiter == "," and schema.header
    assert schema.event_codes == {"P": EventType.PAYOFF, "D": EventType.REO}
    rows = list(parse_performance_file(io.StringIO("id,month,age,code\nx,2012-01,0,\nx,2012-02,1,D\n"), schema))
    assert [r.event for r in rows] == [None, EventType.REO]
    assert load_schema("freddie-mac") is FREDDIE_MAC_PRESET


def test_schema_rejects_shared_columns():
    with pytest.raises(ValueError):
        SchemaConfig(id_column=1, date_column=1)


@settings(max_examples=100, deadline=None)
@given(panels())
def test_clean_is_idempotent(panel):
    again, rep = clean_panel(panel_to_rows(panel), panel.censor_date)
    assert again.individuals == panel.individuals
    assert rep.individuals_kept == len(panel)
    assert rep.rows_read == sum(int(s) for s in panel.survival_time)


@settings(max_examples=50, deadline=None)
@given(panels())
def test_file_round_trip(panel):
    buf = io.StringIO()
    write_performance_file(panel, buf)
    buf.seek(0)
    issues = []
    again, rep = clean_panel(parse_performance_file(buf, issues=issues), panel.censor_date)
    assert issues == []
    assert again.individuals == panel.individuals
    # rows_read counts exactly the parsed, non-skipped rows
    assert rep.rows_read == buf.getvalue().count("\n")


def test_observation_row_defaults():
    r = ObservationRow("a", MonthDate(2010, 1), 0, None)
    assert r.line == 0
