"""Date aligned super dataset (DASD): analytic counts and stacked samples.

A stacked sample is stored row-wise. A row ``(landmark l, date d,
multiplicity k)`` stands for ``k`` stacked copies of the observation at ``d``
whose landmarks are ``l, l+1, ..., l+k-1``. Forward samplers always emit
``k = 1``; the backward sampler emits one row per selected observation with
``l`` = the individual's entry and ``k`` = months since entry, i.e. all of its
backward landmark copies at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np

from .panel import (
    EVENT_TYPES,
    N_CATEGORIES,
    SURVIVAL,
    EventType,
    HazardTable,
    MonthDate,
    Panel,
)

__all__ = [
    "DEFAULT_ROW_BUDGET",
    "DasdCounts",
    "LandmarkCounts",
    "RowBudgetExceeded",
    "StackedRow",
    "StackedSample",
    "dasd_counts",
    "dasd_counts_from_landmark",
    "dasd_table",
    "expand_multiplicity",
    "landmark_window",
    "materialize_dasd",
    "stacks_to_sample",
]

DEFAULT_ROW_BUDGET = 10_000_000


class RowBudgetExceeded(RuntimeError):
    def __init__(self, rows: int, budget: int):
        self.rows = rows
        self.budget = budget
        super().__init__(f"super dataset has {rows} rows, over the budget of {budget}")


@dataclass(frozen=True)
class StackedRow:
    id: str
    landmark: MonthDate
    date: MonthDate
    t: int
    event: EventType
    weight: float
    multiplicity: int


@dataclass(frozen=True, eq=False)
class StackedSample:
    """Columnar stacked sample; ``ind`` indexes into ``ids``.

    Arrays are kept in canonical order (individual, landmark, date) so two
    samples built from the same inputs serialise identically.
    """

    ids: tuple[str, ...]
    ind: np.ndarray
    landmark: np.ndarray
    date: np.ndarray
    event: np.ndarray
    weight: np.ndarray
    multiplicity: np.ndarray
    method: str = "super"
    params: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ind)

    @property
    def t(self) -> np.ndarray:
        return self.date - self.landmark + 1

    @property
    def expanded_rows(self) -> int:
        return int(self.multiplicity.sum())

    @property
    def total_weight(self) -> float:
        return float(np.dot(self.weight, self.multiplicity))

    def rows(self):
        for k in range(len(self)):
            yield StackedRow(
                id=self.ids[self.ind[k]],
                landmark=MonthDate.from_index(int(self.landmark[k])),
                date=MonthDate.from_index(int(self.date[k])),
                t=int(self.date[k] - self.landmark[k] + 1),
                event=EventType(int(self.event[k])),
                weight=float(self.weight[k]),
                multiplicity=int(self.multiplicity[k]),
            )

    def canonical(self) -> "StackedSample":
        order = np.lexsort((self.date, self.landmark, self.ind))
        return StackedSample(
            self.ids,
            self.ind[order],
            self.landmark[order],
            self.date[order],
            self.event[order],
            self.weight[order],
            self.multiplicity[order],
            self.method,
            dict(self.params),
        )

    def date_mass(self) -> tuple[int, np.ndarray]:
        """(first month index, mass[k, category]) with mass = sum of weight * multiplicity."""
        if len(self) == 0:
            return 0, np.zeros((0, N_CATEGORIES))
        start = int(self.date.min())
        n = int(self.date.max()) - start + 1
        mass = np.zeros((n, N_CATEGORIES))
        np.add.at(mass, (self.date - start, self.event), self.weight * self.multiplicity)
        return start, mass


def _empty_sample(ids, method, params) -> StackedSample:
    z = np.zeros(0, dtype=np.int64)
    return StackedSample(ids, z, z.copy(), z.copy(), z.copy(), np.zeros(0), z.copy(), method, params)


def stacks_to_sample(
    panel: Panel,
    ind: np.ndarray,
    landmark: np.ndarray,
    weight: np.ndarray | float = 1.0,
    method: str = "super",
    params: dict | None = None,
) -> StackedSample:
    """Expand forward stacks ``(ind, landmark)`` into their full suffix rows."""
    params = {} if params is None else params
    ind = np.asarray(ind, dtype=np.int64)
    landmark = np.asarray(landmark, dtype=np.int64)
    if len(ind) == 0:
        return _empty_sample(panel.ids, method, params)
    weight = np.broadcast_to(np.asarray(weight, dtype=np.float64), ind.shape)
    lengths = panel.last[ind] - landmark + 1
    if np.any(lengths < 1):
        raise ValueError("landmark after the individual's last month")
    r_ind = np.repeat(ind, lengths)
    r_landmark = np.repeat(landmark, lengths)
    starts = np.cumsum(lengths) - lengths
    r_date = r_landmark + (np.arange(int(lengths.sum()), dtype=np.int64) - np.repeat(starts, lengths))
    sample = StackedSample(
        panel.ids,
        r_ind,
        r_landmark,
        r_date,
        panel.category_at(r_ind, r_date),
        np.repeat(weight, lengths),
        np.ones(len(r_ind), dtype=np.int64),
        method,
        params,
    )
    return sample.canonical()


def materialize_dasd(panel: Panel, row_budget: int = DEFAULT_ROW_BUDGET) -> StackedSample:
    """Every landmark of every individual with its full suffix, weight 1.

    Raises :class:`RowBudgetExceeded` (carrying the row count) when the
    super dataset is larger than ``row_budget``.
    """
    rows = panel.super_size
    if rows > row_budget:
        raise RowBudgetExceeded(rows, row_budget)
    ind, date = panel.observations
    return stacks_to_sample(panel, ind, date, 1.0, method="super", params={})


def expand_multiplicity(sample: StackedSample) -> StackedSample:
    """Physically expand each row into ``multiplicity`` copies (one per landmark)."""
    k = sample.multiplicity
    if np.all(k == 1):
        return sample
    reps = np.repeat(np.arange(len(sample)), k)
    starts = np.cumsum(k) - k
    offset = np.arange(int(k.sum()), dtype=np.int64) - np.repeat(starts, k)
    out = StackedSample(
        sample.ids,
        sample.ind[reps],
        sample.landmark[reps] + offset,
        sample.date[reps],
        sample.event[reps],
        sample.weight[reps],
        np.ones(len(reps), dtype=np.int64),
        sample.method,
        dict(sample.params),
    )
    return out.canonical()


@dataclass(frozen=True)
class DasdCounts:
    """Super-dataset counts at one date: ``counts[category]`` and their total."""

    date: MonthDate
    counts: dict[EventType, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def events(self) -> int:
        return sum(self.counts[ev] for ev in EVENT_TYPES)

    def hazard(self, event: EventType | None = None) -> Fraction:
        num = self.events if event is None else self.counts[event]
        return Fraction(num, self.total) if self.total else Fraction(0)


def dasd_counts(panel: Panel, date: MonthDate) -> DasdCounts:
    """Analytic DASD counts at ``date``: each observation counts ``t`` times.

    ``t`` is the individual's months since entry (1 in the entry month), i.e.
    the number of landmarks whose stacks cover that observation.
    """
    d = date.index
    alive = (panel.entry <= d) & (d <= panel.last)
    t = d - panel.entry[alive] + 1
    cat = np.where(panel.last[alive] == d, panel.terminal[alive], SURVIVAL)
    sums = np.zeros(N_CATEGORIES, dtype=np.int64)
    np.add.at(sums, cat, t)
    return DasdCounts(date, {ev: int(sums[ev]) for ev in EventType})


def dasd_table(panel: Panel) -> list[DasdCounts]:
    """:func:`dasd_counts` at every date of the panel span."""
    ind, date = panel.observations
    start = int(panel.entry.min())
    n = int(panel.last.max()) - start + 1
    sums = np.zeros((n, N_CATEGORIES), dtype=np.int64)
    np.add.at(sums, (date - start, panel.category_at(ind, date)), date - panel.entry[ind] + 1)
    return [
        DasdCounts(MonthDate.from_index(start + k), {ev: int(sums[k, ev]) for ev in EventType})
        for k in range(n)
    ]


@dataclass(frozen=True, eq=False)
class LandmarkCounts:
    """Unstacked and super-dataset counts by month after a landmark.

    Row ``k`` is offset ``t = k + 1`` (date ``landmark + k``); ``super_counts
    = t * original``.
    """

    landmark: MonthDate
    original: np.ndarray
    notice: str | None = None

    @property
    def horizon(self) -> int:
        return len(self.original)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)

    @property
    def dates(self) -> list[MonthDate]:
        return [self.landmark + k for k in range(self.horizon)]

    @property
    def super_counts(self) -> np.ndarray:
        return self.original * self.offsets[:, None]


def at_risk_at_landmark(panel: Panel, landmark: MonthDate) -> np.ndarray:
    """Individuals observed at ``landmark`` that do not have an event there."""
    L = landmark.index
    alive = (panel.entry <= L) & (L <= panel.last)
    event_at_l = (panel.last == L) & (panel.terminal != SURVIVAL)
    return alive & ~event_at_l


def dasd_counts_from_landmark(panel: Panel, landmark: MonthDate, horizon: int) -> LandmarkCounts:
    """Per-offset counts of the super dataset started at ``landmark``.

    Only individuals at risk at the landmark contribute; at offset ``t`` the
    super dataset holds ``t`` copies (landmarks ``landmark .. date``) of each
    unstacked observation.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    L = landmark.index
    keep = at_risk_at_landmark(panel, landmark)
    original = np.zeros((horizon, N_CATEGORIES), dtype=np.int64)
    if not keep.any():
        return LandmarkCounts(landmark, original, notice=f"no individual at risk at {landmark}")
    last = panel.last[keep]
    term = panel.terminal[keep]
    end = np.minimum(last, L + horizon - 1) - L
    # at risk at offset k for k in [0, end]
    diff = np.zeros(horizon + 1, dtype=np.int64)
    np.add.at(diff, np.zeros_like(end), 1)
    np.add.at(diff, end + 1, -1)
    at_risk = np.cumsum(diff)[:horizon]
    ev = (term != SURVIVAL) & (last <= L + horizon - 1)
    np.add.at(original, (last[ev] - L, term[ev]), 1)
    original[:, SURVIVAL] = at_risk - original[:, :SURVIVAL].sum(axis=1)
    return LandmarkCounts(landmark, original)


Source = Union[Panel, StackedSample]


def landmark_window(source: Source, landmark: MonthDate, horizon: int) -> HazardTable:
    """Hazards over ``[landmark, landmark + horizon - 1]`` for a panel or a sample.

    For a :class:`Panel` this is the unstacked hazard among individuals at
    risk at the landmark. For a :class:`StackedSample` only the stacked copies
    whose landmark equals ``landmark`` count, each with its weight.
    """
    from .hazard import window_hazard

    return window_hazard(source, landmark, horizon)
