"""Weighted hazard estimation, sampling-error metrics and variance formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .dasd import StackedSample, dasd_counts_from_landmark
from .panel import (
    EVENT_TYPES,
    N_CATEGORIES,
    SURVIVAL,
    EventType,
    HazardTable,
    MonthDate,
    Panel,
    hazard_table_from_mass,
)

__all__ = [
    "ErrorReport",
    "aligned_hazards",
    "error_report",
    "fpc_variance",
    "hazard_variance",
    "mae",
    "rmse",
    "se_with_fpc",
    "weighted_hazard",
    "window_hazard",
    "window_mass",
]

DEFAULT_HORIZON = 24


def window_mass(source: Union[Panel, StackedSample], landmark: MonthDate, horizon: int) -> np.ndarray:
    """(horizon, 5) category mass over the landmark window.

    Panel: unstacked counts among individuals at risk at the landmark.
    Sample: weights of the stacked copies whose landmark is ``landmark``;
    event copies dated at the landmark itself are dropped, since a landmark
    row is a survival by construction.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(source, Panel):
        return dasd_counts_from_landmark(source, landmark, horizon).original.astype(np.float64)
    L = landmark.index
    s = source
    sel = (
        (s.landmark <= L)
        & (L <= s.landmark + s.multiplicity - 1)
        & (s.date >= L)
        & (s.date <= L + horizon - 1)
        & ~((s.date == L) & (s.event != SURVIVAL))
    )
    mass = np.zeros((horizon, N_CATEGORIES))
    np.add.at(mass, (s.date[sel] - L, s.event[sel]), s.weight[sel])
    return mass


def window_hazard(source: Union[Panel, StackedSample], landmark: MonthDate, horizon: int) -> HazardTable:
    mass = window_mass(source, landmark, horizon)
    notice = None
    if not mass.any():
        notice = f"nothing at risk in the window starting {landmark}"
    keys = [landmark + k for k in range(horizon)]
    return hazard_table_from_mass(keys, mass, align="date", notice=notice)


def weighted_hazard(
    sample: StackedSample,
    landmark: MonthDate | None = None,
    horizon: int = DEFAULT_HORIZON,
) -> HazardTable:
    """Weighted hazard of a stacked sample.

    With a ``landmark``, the result covers the prediction window that starts
    there (see :func:`window_mass`). Without one, every date of the sample is
    used and each row counts ``weight * multiplicity``, which for the full
    super dataset reproduces the date-aligned super-dataset hazard.
    """
    if landmark is not None:
        return window_hazard(sample, landmark, horizon)
    start, mass = sample.date_mass()
    keys = [MonthDate.from_index(start + k) for k in range(len(mass))]
    return hazard_table_from_mass(keys, mass, align="date")


def aligned_hazards(sample_hz: HazardTable, reference_hz: HazardTable, event: EventType) -> tuple[np.ndarray, np.ndarray]:
    """Hazard pairs over the reference keys.

    A key the sample lacks (no at-risk mass) counts as hazard 0.
    """
    if len(reference_hz) == 0:
        raise ValueError("reference hazard table is empty")
    ref = reference_hz.hazards[:, event]
    pos = {key: k for k, key in enumerate(sample_hz.keys)}
    shz = sample_hz.hazards
    got = np.array([shz[pos[key], event] if key in pos else 0.0 for key in reference_hz.keys])
    return got, ref


def mae(sample: Sequence[float], reference: Sequence[float]) -> float:
    a = np.asarray(sample, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("need two non-empty hazard series of equal length")
    return float(np.mean(np.abs(a - b)))


def rmse(sample: Sequence[float], reference: Sequence[float]) -> float:
    a = np.asarray(sample, dtype=np.float64)
    b = np.asarray(reference, dtype=np.float64)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("need two non-empty hazard series of equal length")
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass(frozen=True)
class EventError:
    mae: float
    rmse: float
    n_dates: int


@dataclass(frozen=True)
class ErrorReport:
    landmark: MonthDate
    horizon: int
    errors: dict[EventType, EventError]

    def __getitem__(self, event: EventType) -> EventError:
        return self.errors[event]


def error_report(sample_hz: HazardTable, reference_hz: HazardTable, landmark: MonthDate, horizon: int) -> ErrorReport:
    errors = {}
    for ev in EVENT_TYPES:
        got, ref = aligned_hazards(sample_hz, reference_hz, ev)
        errors[ev] = EventError(mae(got, ref), rmse(got, ref), len(ref))
    return ErrorReport(landmark, horizon, errors)


def hazard_variance(mu):
    """Population variance of a 0/1 event indicator with mean ``mu``: mu(1 - mu).

    Exact for ``Fraction`` input.
    """
    if not 0 <= mu <= 1:
        raise ValueError(f"hazard must be in [0, 1], got {mu}")
    return mu * (1 - mu)


def fpc_variance(sample_var: float, n: int, sampling_rate: float) -> float:
    """Variance of a sample mean with the finite population correction."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < sampling_rate <= 1:
        raise ValueError("sampling rate must be in (0, 1]")
    return (1 - sampling_rate) * sample_var / n


def se_with_fpc(sample_var: float, n: int, sampling_rate: float) -> float:
    """Standard error ``sqrt((1 - rate) * var / n)``; :func:`fpc_variance` gives the unrooted value."""
    v = fpc_variance(sample_var, n, sampling_rate)
    if isinstance(v, Fraction):
        v = float(v)
    return math.sqrt(v)
