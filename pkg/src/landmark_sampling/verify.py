"""Built-in oracle checks run by ``landmark-sampling verify``.

Every check is deterministic: the combinatorial grid is fixed and the panels
are either supplied or generated from fixed seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dasd import dasd_table, materialize_dasd
from .hazard import window_mass
from .oracles import (
    enumerate_fixed_size_rowcounts,
    enumerate_subset_rowcounts,
    rowcount_identity,
    vandermonde_rowcount,
)
from .panel import Panel, size_table
from .samplers import ProgressiveWeightTable, SamplerConfig
from .synth import SynthConfig, illustration_panel, synthetic_panel

SUITES = ("combinatorics", "dasd", "census")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _combinatorics() -> list[Check]:
    out = []
    bad = [i for i in range(1, 201) if not rowcount_identity(i).equal]
    out.append(Check("rowcount_identity i=1..200", not bad, f"{200 - len(bad)}/200 equal"))

    triples = [(M, n, m) for M in range(1, 25) for n in range(1, M + 1) for m in range(1, M + 1)]
    triples += [(60, n, m) for n in range(1, 61, 7) for m in range(1, 61, 5)]
    bad = [t for t in triples if not vandermonde_rowcount(*t).holds]
    out.append(Check("vandermonde_rowcount grid", not bad, f"{len(triples) - len(bad)}/{len(triples)} hold"))

    bad = [n for n in range(1, 17) if enumerate_subset_rowcounts(n) != [Fraction(i, 2) for i in range(1, n + 1)]]
    out.append(Check("subset enumeration n=1..16", not bad, "mean row count i/2" if not bad else f"differs for n={bad}"))

    pairs = [(M, n) for M in range(1, 13) for n in range(1, M + 1)]
    bad = [(M, n) for M, n in pairs if enumerate_fixed_size_rowcounts(M, n) != [Fraction(m * n, M) for m in range(1, M + 1)]]
    out.append(Check("fixed-size enumeration M<=12", not bad, f"{len(pairs) - len(bad)}/{len(pairs)} equal m*n/M"))
    return out


def _panels(panel: Panel | None) -> list[tuple[str, Panel]]:
    if panel is not None:
        return [("input", panel)]
    return [
        ("illustration", illustration_panel()),
        ("synthetic", synthetic_panel(SynthConfig.spread(60, 12, n_months=30, seed=11))),
    ]


def _dasd(panel: Panel | None) -> list[Check]:
    out = []
    for name, p in _panels(panel):
        sample = materialize_dasd(p)
        start, mass = sample.date_mass()
        table = dasd_table(p)
        expect = np.array([[c.counts[ev] for ev in sorted(c.counts)] for c in table], dtype=np.float64)
        ok = start == table[0].date.index and np.array_equal(mass, expect)
        out.append(Check(f"materialized DASD equals analytic counts ({name})", bool(ok), f"{len(table)} dates, {sample.expanded_rows} rows"))
    return out


def census_configs() -> list[SamplerConfig]:
    return [
        SamplerConfig("vertical", seed=0, p=1),
        SamplerConfig("horizontal", seed=0, p=1),
        SamplerConfig("uniform", seed=0, distance=1, first_offset=0),
        SamplerConfig("backward", seed=0, weight_table=ProgressiveWeightTable.census()),
    ]


def _census(panel: Panel | None) -> list[Check]:
    out = []
    for name, p in _panels(panel):
        first, last = p.span
        horizon = last - first + 1
        st = size_table(p)
        _, dasd_mass = materialize_dasd(p).date_mass()
        for cfg in census_configs():
            sample = cfg.sample(p, size_table=st)
            _, mass = sample.date_mass()
            ok = np.array_equal(mass, dasd_mass)
            bad = [
                str(first + k)
                for k in range(horizon)
                if not np.array_equal(window_mass(sample, first + k, horizon - k), window_mass(p, first + k, horizon - k))
            ]
            ok = ok and not bad
            detail = f"{horizon} landmark windows equal" if ok else f"mismatch at {', '.join(bad[:3]) or 'date-aligned mass'}"
            out.append(Check(f"{cfg.method} census equals original ({name})", bool(ok), detail))
    return out


def run(suite: str, panel: Panel | None = None) -> list[Check]:
    if suite == "combinatorics":
        return _combinatorics()
    if suite == "dasd":
        return _dasd(panel)
    if suite == "census":
        return _census(panel)
    raise ValueError(f"unknown suite {suite!r}")
