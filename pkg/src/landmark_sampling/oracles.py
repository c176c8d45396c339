"""Brute-force and exact-arithmetic checks of the row-count identities, plus a
Monte Carlo harness for the bias of sampled hazards.

Everything combinatorial uses Python integers and ``Fraction``, so identities
are checked as equalities rather than within a tolerance.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rng
from .hazard import window_mass
from .panel import EVENT_TYPES, EventType, MonthDate, Panel, SizeTable, size_table as build_size_table
from .samplers import SamplerConfig

__all__ = [
    "BiasCell",
    "BiasReport",
    "RowcountIdentity",
    "VandermondeRowcount",
    "enumerate_fixed_size_rowcounts",
    "enumerate_subset_rowcounts",
    "monte_carlo_bias",
    "rowcount_identity",
    "vandermonde_rowcount",
]

MAX_SUBSET_N = 20
MAX_FIXED_SIZE_SUBSETS = 10**6


def enumerate_subset_rowcounts(n: int) -> list[Fraction]:
    """Mean row count at each offset ``1..n`` over all ``2**n`` landmark subsets.

    Landmark ``j`` (1-based) covers offsets ``j..n``, so the row count at
    offset ``i`` of a subset is the number of chosen landmarks ``<= i``.
    """
    if not 1 <= n <= MAX_SUBSET_N:
        raise ValueError(f"n must be in 1..{MAX_SUBSET_N}")
    masks = np.arange(1 << n, dtype=np.uint32)
    totals = []
    for i in range(1, n + 1):
        low = masks & np.uint32((1 << i) - 1)
        totals.append(int(np.bitwise_count(low).sum(dtype=np.int64)))
    return [Fraction(total, 1 << n) for total in totals]


@dataclass(frozen=True)
class RowcountIdentity:
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def rowcount_identity(i: int) -> RowcountIdentity:
    """``sum_j j * C(i, j)`` by literal summation against ``i * 2**(i-1)``."""
    if i < 1:
        raise ValueError("i must be >= 1")
    lhs = sum(j * math.comb(i, j) for j in range(i + 1))
    return RowcountIdentity(lhs, i << (i - 1))


def _comb(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


@dataclass(frozen=True)
class VandermondeRowcount:
    M: int
    n: int
    m: int
    lhs: int
    rhs: int
    expected_count: Fraction
    mp: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs and self.expected_count == self.mp


def vandermonde_rowcount(M: int, n: int, m: int) -> VandermondeRowcount:
    """Row count at month ``m`` summed over all ``n``-subsets of ``M`` landmarks.

    ``lhs`` is the literal sum of ``i * C(m, i) * C(M-m, n-i)`` (terms with
    ``M - m < n - i`` vanish), ``rhs`` the closed form ``m * C(M-1, n-1)``.
    """
    if not 1 <= n <= M:
        raise ValueError("need 1 <= n <= M")
    if not 1 <= m <= M:
        raise ValueError("need 1 <= m <= M")
    lhs = sum(i * _comb(m, i) * _comb(M - m, n - i) for i in range(1, m + 1))
    rhs = m * math.comb(M - 1, n - 1)
    return VandermondeRowcount(M, n, m, lhs, rhs, Fraction(lhs, math.comb(M, n)), Fraction(m * n, M))


def enumerate_fixed_size_rowcounts(M: int, n: int) -> list[Fraction]:
    """Mean row count at each month ``1..M`` over every ``n``-subset of ``M`` landmarks."""
    if not 1 <= n <= M:
        raise ValueError("need 1 <= n <= M")
    n_subsets = math.comb(M, n)
    if n_subsets > MAX_FIXED_SIZE_SUBSETS:
        raise ValueError(f"C({M},{n}) = {n_subsets} subsets exceeds the enumeration budget")
    totals = [0] * M
    for subset in itertools.combinations(range(M), n):
        count = 0
        pos = 0
        for month in range(M):
            while pos < n and subset[pos] <= month:
                pos += 1
                count += 1
            totals[month] += count
    return [Fraction(total, n_subsets) for total in totals]


@dataclass(frozen=True)
class BiasCell:
    date: MonthDate
    event: EventType
    original: float
    mean: float
    se: float

    @property
    def bias(self) -> float:
        return self.mean - self.original

    def within(self, k: float = 3.0) -> bool:
        return abs(self.bias) <= k * self.se


@dataclass(frozen=True)
class BiasReport:
    method: str
    landmark: MonthDate
    horizon: int
    replications: int
    cells: tuple[BiasCell, ...]
    empty_fraction: float
    params: dict = field(default_factory=dict)

    @property
    def inconclusive(self) -> bool:
        return self.empty_fraction > 0.5

    def pass_fraction(self, k: float = 3.0) -> float:
        if not self.cells:
            return 0.0
        return sum(c.within(k) for c in self.cells) / len(self.cells)


def _replicate_hazards(config, panel, st, landmark, horizon, seeds):
    """(len(seeds), horizon, 4) window hazards; dates without mass give hazard 0."""
    out = np.zeros((len(seeds), horizon, len(EVENT_TYPES)))
    empty = np.zeros(len(seeds), dtype=bool)
    for r, seed in enumerate(seeds):
        part = config.with_seed(seed).window_sample(panel, landmark, horizon, size_table=st)
        mass = window_mass(part, landmark, horizon)
        risk = mass.sum(axis=1)
        empty[r] = not risk.any()
        ok = risk > 0
        out[r, ok] = mass[ok, : len(EVENT_TYPES)] / risk[ok, None]
    return out, empty


def monte_carlo_bias(
    panel: Panel,
    config: SamplerConfig,
    replications: int,
    seed: int,
    landmark: MonthDate,
    horizon: int = 24,
    threads: int = 1,
    size_table: SizeTable | None = None,
) -> BiasReport:
    """Replicate ``config`` and compare mean window hazards with the original.

    Replication ``r`` uses seed ``derive_seed(seed, r)``. Each cell reports
    the across-replication mean, the original hazard among individuals at risk
    at the landmark, and the Monte Carlo standard error (sd / sqrt(R)). Only
    dates with positive original at-risk count are reported; replications
    that leave a date empty score hazard 0 there.
    """
    if replications < 100:
        raise ValueError("replications must be >= 100")
    st = build_size_table(panel) if size_table is None else size_table
    seeds = [rng.derive_seed(seed, r) for r in range(replications)]
    chunks = [seeds[i::max(1, threads)] for i in range(max(1, threads))]
    chunks = [c for c in chunks if c]
    if len(chunks) == 1:
        results = [_replicate_hazards(config, panel, st, landmark, horizon, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(lambda c: _replicate_hazards(config, panel, st, landmark, horizon, c), chunks))
    hz = np.concatenate([h for h, _ in results])
    empty = np.concatenate([e for _, e in results])
    # order-free statistics: sums do not depend on chunking up to float rounding,
    # so sort replication values before reducing
    hz = np.sort(hz, axis=0)
    mean = hz.mean(axis=0)
    se = hz.std(axis=0, ddof=1) / math.sqrt(replications)
    # constant cells: report the value itself rather than a rounded average
    const = hz[0] == hz[-1]
    mean[const] = hz[0][const]
    se[const] = 0.0

    ref = window_mass(panel, landmark, horizon)
    risk = ref.sum(axis=1)
    cells = []
    for k in range(horizon):
        if risk[k] <= 0:
            continue
        for ev in EVENT_TYPES:
            cells.append(
                BiasCell(landmark + k, ev, float(ref[k, ev] / risk[k]), float(mean[k, ev]), float(se[k, ev]))
            )
    return BiasReport(
        config.method,
        landmark,
        horizon,
        replications,
        tuple(cells),
        float(empty.mean()),
        params={"seed": seed},
    )
