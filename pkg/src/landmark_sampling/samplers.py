"""The five landmark samplers.

Forward samplers (uniform, vertical, horizontal, single) choose landmarks and
append each chosen landmark's full suffix. The backward sampler draws
observations per (date, category) with count-bracketed rates and attaches all
of an observation's backward landmark copies as one row.

Randomness comes from :mod:`landmark_sampling.rng`: each decision is keyed by
(seed, sampler stream, id, month), so sharding the work over threads cannot
change the result.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import rng
from .dasd import StackedSample, _empty_sample, stacks_to_sample
from .panel import MonthDate, Panel, SizeTable, size_table as build_size_table

__all__ = [
    "Bracket",
    "ProgressiveWeightTable",
    "progressive_rate",
    "sample_backward",
    "sample_horizontal",
    "sample_single",
    "sample_uniform",
    "sample_vertical",
    "METHODS",
    "SamplerConfig",
]

METHODS = ("uniform", "vertical", "horizontal", "single", "backward")


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _check_rate(p) -> Fraction:
    p = as_fraction(p)
    if not 0 < p <= 1:
        raise ValueError(f"sampling rate must be in (0, 1], got {p}")
    return p


@dataclass(frozen=True)
class Bracket:
    lo: int
    hi: int | None
    rate: Fraction

    @property
    def weight(self) -> Fraction:
        return 1 / self.rate


@dataclass(frozen=True)
class ProgressiveWeightTable:
    """Selection rate by category size; weight is the reciprocal rate.

    Brackets must start at 1, be contiguous and end open-ended.
    """

    brackets: tuple[Bracket, ...]

    def __post_init__(self) -> None:
        b = self.brackets
        if not b:
            raise ValueError("weight table needs at least one bracket")
        if b[0].lo != 1:
            raise ValueError("first bracket must start at 1")
        for prev, nxt in zip(b, b[1:]):
            if prev.hi is None or nxt.lo != prev.hi + 1:
                raise ValueError(f"brackets not contiguous at {prev.lo}..{prev.hi} / {nxt.lo}")
        if b[-1].hi is not None:
            raise ValueError("last bracket must be open-ended")
        for br in b:
            if br.hi is not None and br.hi < br.lo:
                raise ValueError(f"empty bracket {br.lo}..{br.hi}")
            if not 0 < br.rate <= 1:
                raise ValueError(f"rate {br.rate} outside (0, 1]")

    @classmethod
    def from_percent(cls, rows: Sequence[tuple[int, int | None, object]]) -> "ProgressiveWeightTable":
        return cls(tuple(Bracket(int(lo), None if hi is None else int(hi), as_fraction(pct) / 100) for lo, hi, pct in rows))

    @classmethod
    def default(cls) -> "ProgressiveWeightTable":
        """The reference progressive weighting: 100% up to 100 down to 10% above 7000."""
        return cls.from_percent(
            [
                (1, 100, 100),
                (101, 500, 90),
                (501, 1000, 80),
                (1001, 2000, 70),
                (2001, 3000, 60),
                (3001, 4000, 50),
                (4001, 5000, 40),
                (5001, 6000, 30),
                (6001, 7000, 20),
                (7001, None, 10),
            ]
        )

    @classmethod
    def census(cls) -> "ProgressiveWeightTable":
        return cls((Bracket(1, None, Fraction(1)),))

    def scaled(self, divisor: int) -> "ProgressiveWeightTable":
        """Same rates with bracket bounds divided by ``divisor`` (for small panels)."""
        out = []
        lo = 1
        for br in self.brackets:
            hi = None if br.hi is None else max(lo, br.hi // divisor)
            out.append(Bracket(lo, hi, br.rate))
            if hi is not None:
                lo = hi + 1
        return ProgressiveWeightTable(tuple(out))

    def lookup(self, counts: np.ndarray) -> np.ndarray:
        """Bracket index for each count (counts must be >= 1)."""
        los = np.array([br.lo for br in self.brackets], dtype=np.int64)
        return np.searchsorted(los, np.asarray(counts, dtype=np.int64), side="right") - 1

    def to_json(self) -> str:
        rows = [
            {"lo": br.lo, "hi": br.hi, "percent": str(br.rate * 100)}
            for br in self.brackets
        ]
        return json.dumps({"brackets": rows}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ProgressiveWeightTable":
        data = json.loads(text)
        rows = data["brackets"] if isinstance(data, dict) else data
        return cls.from_percent([(r["lo"], r.get("hi"), r["percent"]) for r in rows])

    @classmethod
    def load(cls, path: str | Path) -> "ProgressiveWeightTable":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RateLookup:
    selection_rate: Fraction
    weight: Fraction


def progressive_rate(count: int, table: ProgressiveWeightTable | None = None) -> RateLookup:
    if count <= 0:
        raise ValueError(f"count must be >= 1, got {count}")
    table = ProgressiveWeightTable.default() if table is None else table
    br = table.brackets[int(table.lookup(np.array([count]))[0])]
    return RateLookup(br.rate, br.weight)


def _shards(n: int, threads: int) -> list[slice]:
    threads = max(1, int(threads))
    edges = np.linspace(0, n, min(threads, max(n, 1)) + 1).astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]


def _run(fn: Callable[[slice], tuple], n: int, threads: int) -> list[np.ndarray]:
    """Apply ``fn`` to contiguous shards of ``range(n)`` and concatenate the outputs."""
    shards = _shards(n, threads)
    if len(shards) <= 1:
        parts = [fn(s) for s in shards]
    else:
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            parts = list(pool.map(fn, shards))
    if not parts:
        return []
    return [np.concatenate(cols) for cols in zip(*parts)]


def _obs_slices(panel: Panel, shard: slice) -> tuple[np.ndarray, np.ndarray]:
    """Observations of the individuals in ``shard`` (observations are id-major)."""
    ind, date = panel.observations
    s = panel.survival_time
    ends = np.cumsum(s)
    lo = int(ends[shard.start - 1]) if shard.start > 0 else 0
    hi = int(ends[shard.stop - 1]) if shard.stop > 0 else 0
    return ind[lo:hi], date[lo:hi]


# Decision rules. Each one is a pure function of keyed uniforms, so evaluating
# it on a subset of individuals or months gives the same answer as evaluating
# it on the whole panel.


def _uniform_offsets(panel: Panel, idx: np.ndarray, first_offset, distance: int, seed) -> np.ndarray:
    if first_offset == "random":
        u = rng.uniforms(seed, "uniform-phase", panel.id_keys[idx], -1)
        return np.floor(u * distance).astype(np.int64)
    return np.full(len(idx), int(first_offset), dtype=np.int64)


def _vertical_keep(panel: Panel, ind: np.ndarray, date: np.ndarray, p: Fraction, seed: int) -> np.ndarray:
    return rng.uniforms(seed, "vertical", panel.id_keys[ind], date) < float(p)


def _horizontal_pick(panel: Panel, ind: np.ndarray, date: np.ndarray, k_of_month, seed: int) -> np.ndarray:
    """Positions of the chosen slots among ``(ind, date)`` (which must hold whole strata)."""
    u = rng.uniforms(seed, "horizontal", panel.id_keys[ind], date)
    order = np.lexsort((ind, u, date))
    d_sorted = date[order]
    rank = np.arange(len(order)) - np.searchsorted(d_sorted, d_sorted, side="left")
    return order[rank < k_of_month(d_sorted)]


def _single_landmarks(panel: Panel, idx: np.ndarray, seed: int) -> np.ndarray:
    s = panel.survival_time[idx]
    u = rng.uniforms(seed, "single", panel.id_keys[idx], -1)
    return panel.entry[idx] + np.minimum(np.floor(u * s).astype(np.int64), s - 1)


class _BackwardRule:
    def __init__(self, panel: Panel, st: SizeTable, table: "ProgressiveWeightTable", seed: int):
        self.panel, self.st, self.table, self.seed = panel, st, table, seed
        self.rates = np.array([float(br.rate) for br in table.brackets])
        self.weights = np.array([float(br.weight) for br in table.brackets])

    def __call__(self, ind: np.ndarray, date: np.ndarray):
        cat = self.panel.category_at(ind, date)
        n = self.st.lookup(date, cat)
        if np.any(n < 1):
            raise ValueError("size table does not cover the panel's observations")
        b = self.table.lookup(n)
        keep = rng.uniforms(self.seed, "backward", self.panel.id_keys[ind], date) < self.rates[b]
        return ind[keep], date[keep], cat[keep], self.weights[b[keep]]


def _backward_sample(panel: Panel, ind, date, cat, weight, params) -> StackedSample:
    if len(ind) == 0:
        return _empty_sample(panel.ids, "backward", params)
    entry = panel.entry[ind]
    return StackedSample(panel.ids, ind, entry, date, cat, weight, date - entry + 1, "backward", params).canonical()


def _check_uniform(first_offset, distance: int, seed) -> None:
    if distance < 1:
        raise ValueError("distance must be >= 1")
    if first_offset == "random":
        if seed is None:
            raise ValueError("a random first offset needs a seed")
    elif not 0 <= int(first_offset) < distance:
        raise ValueError("first_offset must be in 0..distance-1")


def sample_uniform(panel: Panel, first_offset: int | str = 0, distance: int = 6, seed: int | None = None, threads: int = 1) -> StackedSample:
    """Landmarks every ``distance`` months from ``entry + first_offset``.

    ``first_offset="random"`` draws an independent offset in
    ``0..distance-1`` per individual (needs ``seed``); over seeds this averages
    the uniform design over its offsets.
    """
    _check_uniform(first_offset, distance, seed)
    params = {"first_offset": first_offset, "distance": distance}
    if first_offset == "random":
        params["seed"] = seed

    def work(shard: slice):
        idx = np.arange(len(panel), dtype=np.int64)[shard]
        off = _uniform_offsets(panel, idx, first_offset, distance, seed)
        s = panel.survival_time[idx]
        n_marks = np.where(off < s, (s - 1 - off) // distance + 1, 0)
        ind = np.repeat(idx, n_marks)
        starts = np.cumsum(n_marks) - n_marks
        k = np.arange(int(n_marks.sum()), dtype=np.int64) - np.repeat(starts, n_marks)
        return ind, panel.entry[ind] + np.repeat(off, n_marks) + k * distance

    cols = _run(work, len(panel), threads)
    return stacks_to_sample(panel, *cols, 1.0, method="uniform", params=params)


def sample_vertical(panel: Panel, p, seed: int, threads: int = 1) -> StackedSample:
    """Each (individual, month) landmark kept independently with probability ``p``."""
    p = _check_rate(p)

    def work(shard: slice):
        ind, date = _obs_slices(panel, shard)
        keep = _vertical_keep(panel, ind, date, p, seed)
        return ind[keep], date[keep]

    cols = _run(work, len(panel), threads)
    return stacks_to_sample(panel, *cols, 1.0, method="vertical", params={"p": str(p), "seed": seed})


def horizontal_stratum_size(p, n_at_risk: int) -> int:
    """Round-half-even of ``p * N`` computed exactly; no forced minimum."""
    return round(as_fraction(p) * n_at_risk)


def _stratum_sizes(panel: Panel, p: Fraction):
    st = build_size_table(panel)
    start = st.start.index
    k_d = np.array([horizontal_stratum_size(p, int(n)) for n in st.total], dtype=np.int64)
    return lambda months: k_d[months - start]


def sample_horizontal(panel: Panel, p, seed: int, threads: int = 1) -> StackedSample:
    """Simple random sample of ``round(p * N_d)`` landmarks in every month ``d``.

    Within a month the individuals at risk are ranked by their keyed uniform
    and the lowest ranks are taken, i.e. a simple random sample without
    replacement.
    """
    p = _check_rate(p)
    k_of_month = _stratum_sizes(panel, p)
    ind_all, date_all = panel.observations
    by_date = np.argsort(date_all, kind="stable")
    sorted_dates = date_all[by_date]
    first = int(panel.entry.min())
    n_months = int(panel.last.max()) - first + 1

    def work(shard: slice):
        # shards are ranges of months; each month is a whole stratum
        months = np.arange(n_months)[shard] + first
        if len(months) == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        lo = np.searchsorted(sorted_dates, months[0], side="left")
        hi = np.searchsorted(sorted_dates, months[-1], side="right")
        ind, date = ind_all[by_date[lo:hi]], sorted_dates[lo:hi]
        pick = _horizontal_pick(panel, ind, date, k_of_month, seed)
        return ind[pick], date[pick]

    cols = _run(work, n_months, threads)
    return stacks_to_sample(panel, *cols, 1.0, method="horizontal", params={"p": str(p), "seed": seed})


def sample_single(panel: Panel, seed: int, threads: int = 1) -> StackedSample:
    """One landmark per individual, uniform over its ``s`` months; every row weighted by ``s``."""

    def work(shard: slice):
        idx = np.arange(len(panel), dtype=np.int64)[shard]
        return idx, _single_landmarks(panel, idx, seed), panel.survival_time[idx].astype(np.float64)

    ind, landmark, weight = _run(work, len(panel), threads)
    return stacks_to_sample(panel, ind, landmark, weight, method="single", params={"seed": seed})


def sample_backward(
    panel: Panel,
    size_table: SizeTable | None = None,
    weight_table: ProgressiveWeightTable | None = None,
    seed: int = 0,
    threads: int = 1,
) -> StackedSample:
    """Backward landmark sample with progressive weighting.

    Each unstacked observation at date ``d`` with category ``c`` is kept with
    the rate bracketed by ``N = size_table(d, c)``. A kept observation becomes
    one row with weight ``1 / rate`` and multiplicity ``t`` (months since
    entry), standing for its ``t`` backward landmark copies. Survival months
    of individuals that later have an event are sampled as survivals.
    """
    st = build_size_table(panel) if size_table is None else size_table
    table = ProgressiveWeightTable.default() if weight_table is None else weight_table
    rule = _BackwardRule(panel, st, table, seed)

    def work(shard: slice):
        return rule(*_obs_slices(panel, shard))

    cols = _run(work, len(panel), threads)
    params = {"seed": seed, "weight_table": [(br.lo, br.hi, str(br.rate)) for br in table.brackets]}
    return _backward_sample(panel, *cols, params)


@dataclass(frozen=True)
class SamplerConfig:
    """A sampler with its parameters and seed.

    ``p`` is used by vertical and horizontal, ``first_offset``/``distance`` by
    uniform, ``weight_table`` by backward.
    """

    method: str
    seed: int = 0
    p: object = Fraction(1, 5)
    distance: int = 6
    first_offset: int | str = 0
    weight_table: ProgressiveWeightTable | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown sampling method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.method in ("vertical", "horizontal"):
            _check_rate(self.p)
        if self.method == "uniform":
            _check_uniform(self.first_offset, self.distance, self.seed)

    def with_seed(self, seed: int) -> "SamplerConfig":
        return replace(self, seed=seed)

    @property
    def table(self) -> ProgressiveWeightTable:
        return ProgressiveWeightTable.default() if self.weight_table is None else self.weight_table

    def sample(self, panel: Panel, threads: int = 1, size_table: SizeTable | None = None) -> StackedSample:
        m = self.method
        if m == "uniform":
            return sample_uniform(panel, self.first_offset, self.distance, self.seed, threads)
        if m == "vertical":
            return sample_vertical(panel, self.p, self.seed, threads)
        if m == "horizontal":
            return sample_horizontal(panel, self.p, self.seed, threads)
        if m == "single":
            return sample_single(panel, self.seed, threads)
        return sample_backward(panel, size_table, self.table, self.seed, threads)

    def window_sample(self, panel: Panel, landmark: MonthDate, horizon: int, size_table: SizeTable | None = None) -> StackedSample:
        """The part of :meth:`sample` that can reach the window at ``landmark``.

        Forward samplers: the stacks whose landmark is ``landmark``. Backward:
        the kept observations dated inside the window from individuals that
        entered by the landmark. Any landmark-window statistic computed on
        this equals the one computed on the full sample.
        """
        L = landmark.index
        alive = np.flatnonzero((panel.entry <= L) & (L <= panel.last))
        m = self.method
        if m == "backward":
            st = build_size_table(panel) if size_table is None else size_table
            rule = _BackwardRule(panel, st, self.table, self.seed)
            end = np.minimum(panel.last[alive], L + horizon - 1)
            n = np.maximum(end - L + 1, 0)
            ind = np.repeat(alive, n)
            starts = np.cumsum(n) - n
            date = L + np.arange(int(n.sum()), dtype=np.int64) - np.repeat(starts, n)
            return _backward_sample(panel, *rule(ind, date), {"seed": self.seed, "window": str(landmark)})
        date = np.full(len(alive), L, dtype=np.int64)
        weight = 1.0
        if m == "uniform":
            off = _uniform_offsets(panel, alive, self.first_offset, self.distance, self.seed)
            gap = L - panel.entry[alive] - off
            chosen = alive[(gap >= 0) & (gap % self.distance == 0)]
        elif m == "vertical":
            chosen = alive[_vertical_keep(panel, alive, date, _check_rate(self.p), self.seed)]
        elif m == "horizontal":
            k_of_month = _stratum_sizes(panel, _check_rate(self.p))
            chosen = alive[_horizontal_pick(panel, alive, date, k_of_month, self.seed)]
        else:
            chosen = alive[_single_landmarks(panel, alive, self.seed) == L]
            weight = panel.survival_time[chosen].astype(np.float64)
        return stacks_to_sample(panel, chosen, np.full(len(chosen), L, dtype=np.int64), weight, method=m, params={"seed": self.seed, "window": str(landmark)})
