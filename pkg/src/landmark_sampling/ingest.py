"""Streaming ingestion of monthly performance files and the panel cleaning rules.

``parse_performance_file`` reads one observation per line in constant memory.
``clean_panel`` keeps loans observed from loan age 0 with consecutive monthly
records; it does not need the input grouped by id, but each id's rows must
arrive in date order (out-of-order or repeated months count as a gap).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Iterator

from .panel import EventType, IndividualHistory, MonthDate, Panel, validate_panel

__all__ = [
    "CleaningReport",
    "FREDDIE_MAC_PRESET",
    "ObservationRow",
    "ParseIssue",
    "SchemaConfig",
    "UnknownEventCodeError",
    "clean_panel",
    "load_schema",
    "panel_to_rows",
    "parse_performance_file",
]


class UnknownEventCodeError(ValueError):
    def __init__(self, code: str, line: int):
        self.code = code
        self.line = line
        super().__init__(f"unmapped event code {code!r} at line {line}")


@dataclass(frozen=True)
class SchemaConfig:
    """Layout of a delimited performance file (0-based column indices).

    A blank event field means the loan continues; every non-blank code must
    appear in ``event_codes``.
    """

    delimiter: str = "|"
    id_column: int = 0
    date_column: int = 1
    age_column: int = 4
    event_column: int = 8
    date_format: str = "%Y%m"
    event_codes: dict[str, EventType] = field(default_factory=dict)
    header: bool = False

    def __post_init__(self) -> None:
        cols = [self.id_column, self.date_column, self.age_column, self.event_column]
        if len(set(cols)) != len(cols):
            raise ValueError("schema columns must be distinct")
        if min(cols) < 0:
            raise ValueError("column indices must be >= 0")
        if not self.delimiter:
            raise ValueError("delimiter must be a non-empty string")
        for code, ev in self.event_codes.items():
            if not isinstance(ev, EventType):
                raise ValueError(f"code {code!r} maps to {ev!r}, not an EventType")

    @property
    def width(self) -> int:
        return max(self.id_column, self.date_column, self.age_column, self.event_column) + 1

    def code_for(self, event: EventType) -> str:
        """First declared code for ``event`` (blank for survival)."""
        if event is EventType.SURVIVAL:
            return ""
        for code, ev in self.event_codes.items():
            if ev is event:
                return code
        raise KeyError(f"schema declares no code for {event.label}")


# Zero-balance codes of the single-family loan-level performance file.
FREDDIE_MAC_PRESET = SchemaConfig(
    delimiter="|",
    id_column=0,
    date_column=1,
    age_column=4,
    event_column=8,
    date_format="%Y%m",
    event_codes={
        "01": EventType.PAYOFF,
        "02": EventType.OTHERS,
        "03": EventType.CHARGEOFF,
        "06": EventType.OTHERS,
        "09": EventType.REO,
        "15": EventType.OTHERS,
        "16": EventType.OTHERS,
        "96": EventType.OTHERS,
    },
)


def _unescape(text: str) -> str:
    return {"\\t": "\t", "tab": "\t", "pipe": "|", "comma": ","}.get(text, text)


def load_schema(source: str | Path | None = None, text: str | None = None) -> SchemaConfig:
    """Read a schema from an INI file with ``[schema]`` and ``[event_codes]`` sections.

    ``source="freddie-mac"`` (or ``None``) returns the shipped preset. Keys
    left out of ``[schema]`` take the preset's values.
    """
    if text is None:
        if source is None or str(source) == "freddie-mac":
            return FREDDIE_MAC_PRESET
        text = Path(source).read_text(encoding="utf-8")
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    cp.read_string(text)
    base = FREDDIE_MAC_PRESET
    sec = cp["schema"] if cp.has_section("schema") else {}
    kwargs = {}
    for f in fields(SchemaConfig):
        if f.name in ("event_codes",) or f.name not in sec:
            continue
        raw = sec[f.name]
        if f.name == "delimiter":
            kwargs[f.name] = _unescape(raw.strip())
        elif f.name == "header":
            kwargs[f.name] = raw.strip().lower() in ("1", "true", "yes")
        elif f.name == "date_format":
            kwargs[f.name] = raw.strip()
        else:
            kwargs[f.name] = int(raw)
    if cp.has_section("event_codes"):
        codes = {k.strip(): EventType.parse(v) for k, v in cp["event_codes"].items()}
        if any(ev is EventType.SURVIVAL for ev in codes.values()):
            raise ValueError("event codes must map to terminal event types; leave continuation blank")
    else:
        codes = dict(base.event_codes)
    return SchemaConfig(**{**{f.name: getattr(base, f.name) for f in fields(SchemaConfig)}, **kwargs, "event_codes": codes})


@dataclass(frozen=True)
class ObservationRow:
    id: str
    date: MonthDate
    loan_age: int
    event: EventType | None
    line: int = 0


@dataclass(frozen=True)
class ParseIssue:
    line: int
    reason: str


def _parse_month(text: str, fmt: str) -> MonthDate:
    dt = datetime.strptime(text.strip(), fmt)
    return MonthDate(dt.year, dt.month)


def parse_performance_file(
    source: str | Path | IO[str],
    schema: SchemaConfig = FREDDIE_MAC_PRESET,
    issues: list[ParseIssue] | None = None,
) -> Iterator[ObservationRow]:
    """Yield observations in file order.

    Malformed lines are skipped and appended to ``issues`` with their line
    number. An event code missing from the schema raises
    :class:`UnknownEventCodeError`.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            yield from parse_performance_file(fh, schema, issues)
        return
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or (schema.header and line_no == 1):
            continue
        parts = line.split(schema.delimiter)
        if len(parts) < schema.width:
            _note(issues, line_no, f"expected at least {schema.width} fields, got {len(parts)}")
            continue
        ident = parts[schema.id_column].strip()
        if not ident:
            _note(issues, line_no, "empty id")
            continue
        try:
            date = _parse_month(parts[schema.date_column], schema.date_format)
        except ValueError:
            _note(issues, line_no, f"bad date {parts[schema.date_column]!r}")
            continue
        try:
            age = int(parts[schema.age_column].strip())
        except ValueError:
            _note(issues, line_no, f"non-numeric loan age {parts[schema.age_column]!r}")
            continue
        code = parts[schema.event_column].strip()
        if code:
            if code not in schema.event_codes:
                raise UnknownEventCodeError(code, line_no)
            event = schema.event_codes[code]
        else:
            event = None
        yield ObservationRow(ident, date, age, event, line_no)


def _note(issues: list[ParseIssue] | None, line: int, reason: str) -> None:
    if issues is not None:
        issues.append(ParseIssue(line, reason))


@dataclass
class CleaningReport:
    """Counters from :func:`clean_panel`; ``+`` merges reports from id shards."""

    rows_read: int = 0
    individuals_kept: int = 0
    individuals_dropped_nonzero_start: int = 0
    individuals_dropped_gap: int = 0
    individuals_dropped_ambiguous_terminal: int = 0
    rows_after_censor: int = 0

    @property
    def individuals_seen(self) -> int:
        return (
            self.individuals_kept
            + self.individuals_dropped_nonzero_start
            + self.individuals_dropped_gap
            + self.individuals_dropped_ambiguous_terminal
        )

    def __add__(self, other: "CleaningReport") -> "CleaningReport":
        return CleaningReport(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def as_text(self) -> str:
        lines = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
        lines.append(f"individuals_seen={self.individuals_seen}")
        return "\n".join(lines) + "\n"


class _Track:
    __slots__ = ("entry", "prev", "first_age", "gap", "n_events", "event", "last_event")

    def __init__(self, row: ObservationRow):
        self.entry = row.date
        self.prev = row.date
        self.first_age = row.loan_age
        self.gap = False
        self.n_events = 0
        self.event: EventType | None = None
        self.last_event = False
        self.note(row)

    def note(self, row: ObservationRow) -> None:
        if row.event is not None:
            self.n_events += 1
            self.event = row.event
        self.last_event = row.event is not None

    def add(self, row: ObservationRow) -> None:
        if row.date - self.prev != 1:
            self.gap = True
        self.prev = row.date
        self.note(row)


def clean_panel(rows: Iterable[ObservationRow], censor_date: MonthDate | None = None) -> tuple[Panel, CleaningReport]:
    """Build a panel from observation rows, applying the cleaning rules.

    Kept: first observed loan age is 0 and months are consecutive. The
    terminal type comes from the last row's code (blank = censored). An id
    with more than one coded row, or a code before its last row, is dropped as
    an ambiguous terminal. Rows after ``censor_date`` are ignored, so loans
    still active then are censored at it.
    """
    report = CleaningReport()
    tracks: dict[str, _Track] = {}
    for row in rows:
        if censor_date is not None and row.date > censor_date:
            report.rows_after_censor += 1
            continue
        report.rows_read += 1
        tr = tracks.get(row.id)
        if tr is None:
            tracks[row.id] = _Track(row)
        else:
            tr.add(row)

    kept = []
    for ident, tr in tracks.items():
        if tr.first_age != 0:
            report.individuals_dropped_nonzero_start += 1
        elif tr.gap:
            report.individuals_dropped_gap += 1
        elif tr.n_events > 1 or (tr.n_events == 1 and not tr.last_event):
            report.individuals_dropped_ambiguous_terminal += 1
        else:
            report.individuals_kept += 1
            terminal = tr.event if tr.last_event else EventType.SURVIVAL
            kept.append(IndividualHistory(ident, tr.entry, tr.prev, terminal))
    if censor_date is None and kept:
        censor_date = max(ind.last for ind in kept)
    return validate_panel(kept, censor_date), report


def panel_to_rows(panel: Panel) -> Iterator[ObservationRow]:
    """Observation rows that :func:`clean_panel` turns back into ``panel``."""
    for ind in panel.individuals:
        for age in range(ind.survival_time):
            date = ind.entry + age
            event = ind.terminal if (date == ind.last and ind.terminal is not EventType.SURVIVAL) else None
            yield ObservationRow(ind.id, date, age, event)


def write_performance_file(panel: Panel, out: IO[str], schema: SchemaConfig = FREDDIE_MAC_PRESET) -> None:
    """Write ``panel`` in ``schema``'s layout (unused columns left blank)."""
    for row in panel_to_rows(panel):
        parts = [""] * schema.width
        parts[schema.id_column] = row.id
        parts[schema.date_column] = datetime(row.date.year, row.date.month, 1).strftime(schema.date_format)
        parts[schema.age_column] = str(row.loan_age)
        parts[schema.event_column] = "" if row.event is None else schema.code_for(row.event)
        out.write(schema.delimiter.join(parts) + "\n")
