"""Seeded synthetic panels with competing monthly risks and seasonality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .panel import EVENT_TYPES, EventType, IndividualHistory, MonthDate, Panel, validate_panel

__all__ = ["SynthConfig", "synthetic_panel", "illustration_panel"]


def _default_hazards() -> dict[EventType, float]:
    return {
        EventType.REO: 0.004,
        EventType.CHARGEOFF: 0.003,
        EventType.PAYOFF: 0.03,
        EventType.OTHERS: 0.0015,
    }


@dataclass
class SynthConfig:
    """Synthetic panel parameters.

    ``cohort_sizes[k]`` individuals enter in month ``start + k``. Each month
    an individual at risk has the event ``e`` with probability
    ``hazards[e] * season(month)`` and is lost to follow-up with probability
    ``dropout``; everyone left is censored at ``start + n_months - 1``.
    ``seasonality`` is the amplitude of a 12-month sine applied to Payoff.
    """

    start: MonthDate = MonthDate(2010, 1)
    n_months: int = 48
    cohort_sizes: list[int] = field(default_factory=lambda: [2000])
    hazards: dict[EventType, float] = field(default_factory=_default_hazards)
    seasonality: float = 0.3
    dropout: float = 0.0
    seed: int = 0

    @classmethod
    def spread(cls, n_individuals: int, entry_months: int, **kwargs) -> "SynthConfig":
        """``n_individuals`` split as evenly as possible over the first ``entry_months``."""
        base, extra = divmod(n_individuals, entry_months)
        sizes = [base + (1 if k < extra else 0) for k in range(entry_months)]
        return cls(cohort_sizes=sizes, **kwargs)


def _monthly_probs(cfg: SynthConfig, month_index: int) -> np.ndarray:
    calendar = month_index % 12
    season = 1.0 + cfg.seasonality * math.sin(2 * math.pi * calendar / 12)
    probs = np.array([cfg.hazards.get(ev, 0.0) for ev in EVENT_TYPES], dtype=np.float64)
    probs[EventType.PAYOFF] *= season
    return np.append(probs, cfg.dropout)


def synthetic_panel(cfg: SynthConfig) -> Panel:
    if len(cfg.cohort_sizes) > cfg.n_months:
        raise ValueError("more entry cohorts than study months")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n = int(sum(cfg.cohort_sizes))
    entry = np.repeat(np.arange(len(cfg.cohort_sizes)), cfg.cohort_sizes) + cfg.start.index
    end = cfg.start.index + cfg.n_months - 1
    last = np.full(n, end, dtype=np.int64)
    terminal = np.full(n, int(EventType.SURVIVAL), dtype=np.int64)
    active = np.zeros(n, dtype=bool)
    for month in range(cfg.start.index, end + 1):
        active |= entry == month
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            continue
        probs = _monthly_probs(cfg, month)
        if probs.sum() >= 1:
            raise ValueError("monthly exit probabilities sum to >= 1")
        u = rng.random(len(idx))
        edges = np.cumsum(probs)
        outcome = np.searchsorted(edges, u, side="right")  # 0..3 events, 4 dropout, 5 continue
        leaving = outcome < len(probs)
        last[idx[leaving]] = month
        hit = idx[leaving]
        terminal[hit] = np.where(outcome[leaving] < len(EVENT_TYPES), outcome[leaving], int(EventType.SURVIVAL))
        active[hit] = False
    width = max(6, len(str(n)))
    people = [
        IndividualHistory(
            f"L{k:0{width}d}",
            MonthDate.from_index(int(entry[k])),
            MonthDate.from_index(int(last[k])),
            EventType(int(terminal[k])),
        )
        for k in range(n)
    ]
    return validate_panel(people, MonthDate.from_index(end))


def illustration_panel() -> Panel:
    """The four-loan example: events for loans 1 (June) and 2 (April), censoring June 2001."""
    jan = MonthDate(2001, 1)
    return validate_panel(
        [
            IndividualHistory("1", jan, MonthDate(2001, 6), EventType.REO),
            IndividualHistory("2", jan, MonthDate(2001, 4), EventType.REO),
            IndividualHistory("3", jan, MonthDate(2001, 6), EventType.SURVIVAL),
            IndividualHistory("4", jan, MonthDate(2001, 3), EventType.SURVIVAL),
        ],
        censor_date=MonthDate(2001, 6),
    )
