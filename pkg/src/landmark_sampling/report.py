"""Delimited-text readers and writers for panels, samples and result tables.

Numbers are written so that equal inputs give byte-identical files:
integral values without a decimal point, other floats via ``repr``.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from typing import IO, Iterable, Sequence

import numpy as np

from .dasd import DasdCounts, LandmarkCounts, StackedSample
from .hazard import ErrorReport
from .panel import (
    EVENT_TYPES,
    EventType,
    HazardTable,
    IndividualHistory,
    MonthDate,
    Panel,
    SizeTable,
    validate_panel,
)

__all__ = [
    "PANEL_HEADER",
    "SAMPLE_HEADER",
    "FileFormatError",
    "fmt",
    "read_panel",
    "read_sample",
    "write_compare_long",
    "write_compare_wide",
    "write_dasd_counts",
    "write_errors",
    "write_hazard_table",
    "write_landmark_counts",
    "write_panel",
    "write_sample",
    "write_size_table",
]

PANEL_HEADER = ["id", "entry", "last", "terminal"]
SAMPLE_HEADER = ["id", "landmark", "date", "t", "event", "weight", "multiplicity"]
CENSOR_PREFIX = "# censor_date:"


class FileFormatError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _writer(out: IO[str]):
    return csv.writer(out, lineterminator="\n")


def write_panel(panel: Panel, out: IO[str]) -> None:
    out.write(f"{CENSOR_PREFIX} {panel.censor_date}\n")
    w = _writer(out)
    w.writerow(PANEL_HEADER)
    for ind in panel.individuals:
        w.writerow([ind.id, str(ind.entry), str(ind.last), ind.terminal.label])


def read_panel(src: IO[str]) -> Panel:
    first = src.readline()
    if not first.startswith(CENSOR_PREFIX):
        raise FileFormatError(f"panel file must start with '{CENSOR_PREFIX} YYYY-MM'")
    try:
        censor = MonthDate.parse(first[len(CENSOR_PREFIX):].strip())
    except ValueError as exc:
        raise FileFormatError(f"bad censor date: {exc}") from None
    reader = csv.reader(src)
    header = next(reader, None)
    if header != PANEL_HEADER:
        raise FileFormatError(f"expected panel header {','.join(PANEL_HEADER)}")
    people = []
    for line_no, row in enumerate(reader, start=3):
        if not row:
            continue
        if len(row) != 4:
            raise FileFormatError(f"line {line_no}: expected 4 fields, got {len(row)}")
        try:
            people.append(IndividualHistory(row[0], MonthDate.parse(row[1]), MonthDate.parse(row[2]), EventType.parse(row[3])))
        except ValueError as exc:
            raise FileFormatError(f"line {line_no}: {exc}") from None
    return validate_panel(people, censor)


def write_sample(sample: StackedSample, out: IO[str]) -> None:
    s = sample.canonical()
    w = _writer(out)
    w.writerow(SAMPLE_HEADER)
    for r in s.rows():
        w.writerow([r.id, str(r.landmark), str(r.date), r.t, r.event.label, fmt(r.weight), r.multiplicity])


def read_sample(src: IO[str], method: str = "file") -> StackedSample:
    reader = csv.reader(src)
    header = next(reader, None)
    if header != SAMPLE_HEADER:
        raise FileFormatError(f"expected sample header {','.join(SAMPLE_HEADER)}")
    cols: list[list] = [[] for _ in range(6)]
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(SAMPLE_HEADER):
            raise FileFormatError(f"line {line_no}: expected {len(SAMPLE_HEADER)} fields, got {len(row)}")
        try:
            landmark = MonthDate.parse(row[1]).index
            date = MonthDate.parse(row[2]).index
            vals = [row[0], landmark, date, int(EventType.parse(row[4])), float(row[5]), int(row[6])]
        except ValueError as exc:
            raise FileFormatError(f"line {line_no}: {exc}") from None
        if int(row[3]) != date - landmark + 1:
            raise FileFormatError(f"line {line_no}: t does not match landmark and date")
        for c, v in zip(cols, vals):
            c.append(v)
    ids = tuple(sorted(set(cols[0])))
    pos = {k: i for i, k in enumerate(ids)}
    sample = StackedSample(
        ids,
        np.array([pos[k] for k in cols[0]], dtype=np.int64),
        np.array(cols[1], dtype=np.int64),
        np.array(cols[2], dtype=np.int64),
        np.array(cols[3], dtype=np.int64),
        np.array(cols[4], dtype=np.float64),
        np.array(cols[5], dtype=np.int64),
        method,
    )
    return sample.canonical()


def _category_labels() -> list[str]:
    return [ev.label for ev in EventType]


def write_size_table(st: SizeTable, out: IO[str]) -> None:
    """One row per date: counts per category, events, total and all-cause hazard."""
    w = _writer(out)
    w.writerow(["date", *_category_labels(), "events", "total", "hazard"])
    for date, row in zip(st.dates, st.counts):
        events = int(row[: len(EVENT_TYPES)].sum())
        total = int(row.sum())
        w.writerow([str(date), *map(fmt, row), events, total, fmt(Fraction(events, total) if total else Fraction(0))])


def write_dasd_counts(table: Sequence[DasdCounts], out: IO[str]) -> None:
    w = _writer(out)
    w.writerow(["date", *_category_labels(), "events", "total", "hazard"])
    for c in table:
        w.writerow([str(c.date), *(c.counts[ev] for ev in EventType), c.events, c.total, fmt(c.hazard())])


def write_landmark_counts(lc: LandmarkCounts, out: IO[str]) -> None:
    """Original and super-dataset counts per offset ``t`` of a landmark window."""
    w = _writer(out)
    labels = _category_labels()
    w.writerow(["date", "t", *(f"original_{x}" for x in labels), *(f"super_{x}" for x in labels)])
    sup = lc.super_counts
    for k, date in enumerate(lc.dates):
        w.writerow([str(date), k + 1, *map(fmt, lc.original[k]), *map(fmt, sup[k])])


def write_hazard_table(hz: HazardTable, out: IO[str]) -> None:
    w = _writer(out)
    w.writerow(["key", "event", "event_mass", "at_risk_mass", "hazard"])
    for key, ev, num, risk, h in hz.rows():
        w.writerow([str(key), ev.label, fmt(num), fmt(risk), fmt(h)])


def write_compare_wide(
    dates: Sequence[MonthDate],
    masses: dict[str, np.ndarray],
    out: IO[str],
) -> None:
    """Window masses laid out one column per (category, source), dates down the rows.

    ``masses`` maps a source name ("original" first) to a (horizon, 5) array.
    """
    sources = list(masses)
    w = _writer(out)
    w.writerow(["date", *(f"{ev.label}_{src}" for ev in EventType for src in sources)])
    for k, date in enumerate(dates):
        w.writerow([str(date), *(fmt(masses[src][k, ev]) for ev in EventType for src in sources)])


def write_compare_long(
    dates: Sequence[MonthDate],
    masses: dict[str, np.ndarray],
    out: IO[str],
) -> None:
    """Plot data: one row per date x event x source with the hazard and its parts."""
    w = _writer(out)
    w.writerow(["date", "event", "source", "event_mass", "at_risk_mass", "hazard"])
    for k, date in enumerate(dates):
        for ev in EVENT_TYPES:
            for src, mass in masses.items():
                risk = float(mass[k].sum())
                h = float(mass[k, ev]) / risk if risk > 0 else 0.0
                w.writerow([str(date), ev.label, src, fmt(mass[k, ev]), fmt(risk), fmt(h)])


def write_errors(reports: dict[str, ErrorReport], out: IO[str]) -> None:
    w = _writer(out)
    w.writerow(["source", "event", "mae", "rmse", "n_dates"])
    for src, rep in reports.items():
        for ev in EVENT_TYPES:
            e = rep[ev]
            w.writerow([src, ev.label, fmt(e.mae), fmt(e.rmse), e.n_dates])


def write_rows(header: Sequence[str], rows: Iterable[Sequence], out: IO[str]) -> None:
    w = _writer(out)
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, int, Fraction, np.generic)) and not isinstance(x, bool) else str(x) for x in row])
