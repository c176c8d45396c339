"""Panel domain types: months, event taxonomy, individual histories, size tables.

Everything here works on whole calendar months. A ``MonthDate`` is converted to
an integer month index (``year * 12 + month - 1``) for array arithmetic, and
``Panel`` caches numpy views of its individuals so the heavier modules can stay
vectorised.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Literal, Sequence

import numpy as np

__all__ = [
    "EVENT_TYPES",
    "EmptyPanelError",
    "EventType",
    "HazardTable",
    "IndividualHistory",
    "MonthDate",
    "Panel",
    "PanelValidationError",
    "SizeTable",
    "ValidationIssue",
    "monthly_hazard_original",
    "size_table",
    "validate_panel",
]


class EventType(enum.IntEnum):
    """Observation-month outcome. ``SURVIVAL`` is the non-terminal continuation."""

    REO = 0
    CHARGEOFF = 1
    PAYOFF = 2
    OTHERS = 3
    SURVIVAL = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "EventType":
        key = text.strip().lower().replace(" ", "").replace("-", "").replace("_", "")
        try:
            return _BY_KEY[key]
        except KeyError:
            raise ValueError(f"unknown event type {text!r}") from None


_LABELS = {
    EventType.REO: "REO",
    EventType.CHARGEOFF: "Chargeoff",
    EventType.PAYOFF: "Payoff",
    EventType.OTHERS: "Others",
    EventType.SURVIVAL: "Survival",
}
_BY_KEY = {label.lower(): ev for ev, label in _LABELS.items()}
_BY_KEY["other"] = EventType.OTHERS
_BY_KEY["censored"] = EventType.SURVIVAL

#: The four terminal event types, in table column order.
EVENT_TYPES: tuple[EventType, ...] = (
    EventType.REO,
    EventType.CHARGEOFF,
    EventType.PAYOFF,
    EventType.OTHERS,
)

SURVIVAL = int(EventType.SURVIVAL)
N_CATEGORIES = len(EventType)

_MONTH_ABBR = ("jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec")


@dataclass(frozen=True, order=True)
class MonthDate:
    """A calendar month. Ordering, ``+ int`` and ``- MonthDate`` are exact."""

    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @property
    def index(self) -> int:
        return self.year * 12 + self.month - 1

    @classmethod
    def from_index(cls, index: int) -> "MonthDate":
        year, month0 = divmod(int(index), 12)
        return cls(year, month0 + 1)

    @classmethod
    def parse(cls, text: str) -> "MonthDate":
        """Parse ``YYYY-MM``, ``YYYYMM``, ``MM/YYYY`` or ``Mon-YYYY``."""
        s = text.strip()
        if m := re.fullmatch(r"(\d{4})-(\d{1,2})", s):
            return cls(int(m[1]), int(m[2]))
        if m := re.fullmatch(r"(\d{4})(\d{2})", s):
            return cls(int(m[1]), int(m[2]))
        if m := re.fullmatch(r"(\d{1,2})/(\d{4})", s):
            return cls(int(m[2]), int(m[1]))
        if m := re.fullmatch(r"([A-Za-z]{3})-(\d{4})", s):
            abbr = m[1].lower()
            if abbr in _MONTH_ABBR:
                return cls(int(m[2]), _MONTH_ABBR.index(abbr) + 1)
        raise ValueError(f"unrecognised month {text!r}")

    def __add__(self, months: int) -> "MonthDate":
        if not isinstance(months, (int, np.integer)):
            return NotImplemented
        return MonthDate.from_index(self.index + int(months))

    def __sub__(self, other):
        if isinstance(other, MonthDate):
            return self.index - other.index
        if isinstance(other, (int, np.integer)):
            return MonthDate.from_index(self.index - int(other))
        return NotImplemented

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class IndividualHistory:
    """Contiguous monthly record of one subject from entry to ``last``.

    ``terminal`` is the event observed at ``last``; ``SURVIVAL`` means the
    subject was censored there.
    """

    id: str
    entry: MonthDate
    last: MonthDate
    terminal: EventType = EventType.SURVIVAL

    @property
    def survival_time(self) -> int:
        return self.last - self.entry + 1


@dataclass(frozen=True)
class ValidationIssue:
    id: str
    reason: str


class PanelValidationError(ValueError):
    """Raised by :func:`validate_panel`; ``issues`` lists every violation."""

    def __init__(self, issues: Sequence[ValidationIssue]):
        self.issues = tuple(issues)
        detail = "; ".join(f"{i.id}: {i.reason}" for i in self.issues[:5])
        more = "" if len(self.issues) <= 5 else f" (+{len(self.issues) - 5} more)"
        super().__init__(f"{len(self.issues)} invalid individual(s): {detail}{more}")


class EmptyPanelError(ValueError):
    def __init__(self) -> None:
        super().__init__("empty panel")


def _id_key(ident: str) -> int:
    return int.from_bytes(hashlib.blake2b(ident.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True, eq=False)
class Panel:
    """Validated, id-sorted collection of histories (the unstacked original).

    Build one with :func:`validate_panel`; the constructor does not check.
    """

    individuals: tuple[IndividualHistory, ...]
    censor_date: MonthDate

    def __len__(self) -> int:
        return len(self.individuals)

    @property
    def span(self) -> tuple[MonthDate, MonthDate]:
        return MonthDate.from_index(int(self.entry.min())), MonthDate.from_index(int(self.last.max()))

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(ind.id for ind in self.individuals)

    @cached_property
    def entry(self) -> np.ndarray:
        return np.fromiter((i.entry.index for i in self.individuals), np.int64, len(self))

    @cached_property
    def last(self) -> np.ndarray:
        return np.fromiter((i.last.index for i in self.individuals), np.int64, len(self))

    @cached_property
    def terminal(self) -> np.ndarray:
        return np.fromiter((int(i.terminal) for i in self.individuals), np.int64, len(self))

    @cached_property
    def survival_time(self) -> np.ndarray:
        return self.last - self.entry + 1

    @cached_property
    def id_keys(self) -> np.ndarray:
        """Stable 64-bit hash of each id; keys the counter-based RNG."""
        return np.fromiter((_id_key(i) for i in self.ids), np.uint64, len(self))

    @cached_property
    def observations(self) -> tuple[np.ndarray, np.ndarray]:
        """Every (individual index, month index) observation, id-major then date."""
        s = self.survival_time
        ind = np.repeat(np.arange(len(self), dtype=np.int64), s)
        starts = np.cumsum(s) - s
        date = self.entry[ind] + (np.arange(int(s.sum()), dtype=np.int64) - starts[ind])
        return ind, date

    def category_at(self, ind: np.ndarray, date: np.ndarray) -> np.ndarray:
        """Outcome category of observation(s) ``(ind, date)``."""
        terminal = self.terminal[ind]
        return np.where(date == self.last[ind], terminal, SURVIVAL)

    def at_risk(self, date: MonthDate) -> int:
        d = date.index
        return int(np.count_nonzero((self.entry <= d) & (d <= self.last)))

    def subset(self, mask: np.ndarray) -> "Panel":
        """Panel of the individuals selected by boolean ``mask`` (same censor date)."""
        chosen = tuple(ind for ind, keep in zip(self.individuals, mask) if keep)
        return Panel(chosen, self.censor_date)

    @property
    def super_size(self) -> int:
        """Row count of the fully stacked super dataset, sum of s(s+1)/2."""
        s = [ind.survival_time for ind in self.individuals]
        return sum(x * (x + 1) // 2 for x in s)


def validate_panel(
    individuals: Iterable[IndividualHistory],
    censor_date: MonthDate | None = None,
) -> Panel:
    """Check the panel invariants and return an id-sorted :class:`Panel`.

    ``censor_date`` defaults to the latest ``last``. Raises
    :class:`EmptyPanelError` for no input and :class:`PanelValidationError`
    listing every offending id otherwise.
    """
    items = list(individuals)
    if not items:
        raise EmptyPanelError()
    if censor_date is None:
        censor_date = max(ind.last for ind in items)

    issues: list[ValidationIssue] = []
    seen: set[str] = set()
    for ind in items:
        if ind.id in seen:
            issues.append(ValidationIssue(ind.id, "duplicate id"))
        seen.add(ind.id)
        if ind.entry > ind.last:
            issues.append(ValidationIssue(ind.id, "entry after last"))
        if ind.last > censor_date:
            issues.append(ValidationIssue(ind.id, "last after censor date"))
        if not isinstance(ind.terminal, EventType):
            issues.append(ValidationIssue(ind.id, "terminal is not an EventType"))
    if issues:
        raise PanelValidationError(issues)
    return Panel(tuple(sorted(items, key=lambda i: i.id)), censor_date)


@dataclass(frozen=True, eq=False)
class SizeTable:
    """Per-date outcome counts of the unstacked panel.

    ``counts[k, c]`` is the number of individuals whose observation at
    ``dates[k]`` has category ``c`` (columns in :class:`EventType` order).
    """

    start: MonthDate
    counts: np.ndarray

    @property
    def dates(self) -> list[MonthDate]:
        return [self.start + k for k in range(len(self.counts))]

    @property
    def total(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __len__(self) -> int:
        return len(self.counts)

    def row(self, date: MonthDate) -> dict[EventType, int]:
        k = date - self.start
        if not 0 <= k < len(self.counts):
            return {ev: 0 for ev in EventType}
        return {ev: int(self.counts[k, ev]) for ev in EventType}

    def lookup(self, date_index: np.ndarray, category: np.ndarray) -> np.ndarray:
        """Vectorised ``N(d, c)``; zero outside the table."""
        k = np.asarray(date_index) - self.start.index
        inside = (k >= 0) & (k < len(self.counts))
        out = np.zeros(np.shape(k), dtype=np.int64)
        out[inside] = self.counts[k[inside], np.asarray(category)[inside]]
        return out


def size_table(panel: Panel) -> SizeTable:
    start = int(panel.entry.min())
    n_dates = int(panel.last.max()) - start + 1
    counts = np.zeros((n_dates, N_CATEGORIES), dtype=np.int64)
    # at-risk via a difference array over [entry, last]
    diff = np.zeros(n_dates + 1, dtype=np.int64)
    np.add.at(diff, panel.entry - start, 1)
    np.add.at(diff, panel.last - start + 1, -1)
    at_risk = np.cumsum(diff)[:n_dates]
    events = panel.terminal != SURVIVAL
    np.add.at(counts, (panel.last[events] - start, panel.terminal[events]), 1)
    counts[:, SURVIVAL] = at_risk - counts[:, :SURVIVAL].sum(axis=1)
    return SizeTable(MonthDate.from_index(start), counts)


Align = Literal["date", "offset"]


@dataclass(frozen=True, eq=False)
class HazardTable:
    """Weighted event and at-risk mass per key, hazards derived on demand.

    ``keys`` are ``MonthDate`` (date alignment) or 1-based month offsets.
    ``mass[k, c]`` is the (weighted) mass of category ``c`` at ``keys[k]``;
    the at-risk mass is the row sum. Keys with zero at-risk mass are kept out
    of ``keys`` and listed in ``omitted``.
    """

    keys: tuple
    mass: np.ndarray
    align: str = "date"
    omitted: tuple = ()
    notice: str | None = None

    @property
    def at_risk_mass(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    @property
    def event_mass(self) -> np.ndarray:
        return self.mass[:, :SURVIVAL]

    @property
    def hazards(self) -> np.ndarray:
        """(n_keys, 4) hazards for the terminal event types."""
        if len(self.keys) == 0:
            return np.zeros((0, SURVIVAL))
        return self.event_mass / self.at_risk_mass[:, None]

    def __len__(self) -> int:
        return len(self.keys)

    def hazard(self, key, event: EventType | None = None) -> float:
        """Hazard at ``key`` for one event type, or all-cause when ``event`` is None."""
        k = self.keys.index(key)
        num = self.event_mass[k].sum() if event is None else self.mass[k, event]
        return float(num / self.at_risk_mass[k])

    def as_dict(self) -> dict:
        """``{key: {EventType: hazard}}`` for the four terminal types."""
        hz = self.hazards
        return {key: {ev: float(hz[k, ev]) for ev in EVENT_TYPES} for k, key in enumerate(self.keys)}

    def rows(self):
        """Yield ``(key, event, event_mass, at_risk_mass, hazard)`` per terminal type."""
        risk = self.at_risk_mass
        for k, key in enumerate(self.keys):
            for ev in EVENT_TYPES:
                yield key, ev, float(self.mass[k, ev]), float(risk[k]), float(self.mass[k, ev] / risk[k])


def hazard_table_from_mass(keys: Sequence, mass: np.ndarray, align: str = "date", notice: str | None = None) -> HazardTable:
    """Drop zero-risk keys into ``omitted`` and wrap the rest."""
    mass = np.asarray(mass, dtype=np.float64)
    keep = mass.sum(axis=1) > 0
    kept = tuple(k for k, ok in zip(keys, keep) if ok)
    dropped = tuple(k for k, ok in zip(keys, keep) if not ok)
    return HazardTable(kept, mass[keep], align=align, omitted=dropped, notice=notice)


def monthly_hazard_original(panel: Panel, align: Align = "date") -> HazardTable:
    """Hazard of the unstacked panel.

    ``align="date"`` divides events at each calendar month by the number at
    risk there. ``align="offset"`` pools individuals by months since entry
    (``m = 1`` is the entry month): events with survival time ``m`` divided by
    the number with survival time ``>= m``.
    """
    if align == "date":
        st = size_table(panel)
        return hazard_table_from_mass(st.dates, st.counts, align="date")
    if align != "offset":
        raise ValueError(f"align must be 'date' or 'offset', got {align!r}")
    s = panel.survival_time
    horizon = int(s.max())
    mass = np.zeros((horizon, N_CATEGORIES), dtype=np.int64)
    events = panel.terminal != SURVIVAL
    np.add.at(mass, (s[events] - 1, panel.terminal[events]), 1)
    # at risk at m: survival time >= m
    at_risk = np.bincount(s - 1, minlength=horizon)[::-1].cumsum()[::-1]
    mass[:, SURVIVAL] = at_risk - mass[:, :SURVIVAL].sum(axis=1)
    return hazard_table_from_mass(list(range(1, horizon + 1)), mass, align="offset")
