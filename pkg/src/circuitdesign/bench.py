"""Robustness distributions over sub-fractions and the benchmark report.

For each number k of removed runs, the robustness of every (or of up to
``max_fractions`` sampled) size-(n-k) sub-fractions is computed, each one
scored exactly when C(n-k, p) fits in ``max_subsets`` and by seeded subset
sampling otherwise.  The report joins the per-k percentiles with the greedy
algorithm's value r_* at the same size, as a table plus one raw
distribution file per k.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .circuits import CircuitBasis, enumerate_circuits
from .designs import Design, ModelSpec
from .linalg import Rational
from .removal import RemovalTrace, nested_sequence
from .robustness import Fraction, Seed, count_saturated, _unrank_combination

__all__ = [
    "RobustnessDistribution",
    "BenchReport",
    "percentile",
    "distribution",
    "bench_report",
    "write_report",
    "DEFAULT_MAX_FRACTIONS",
    "DEFAULT_MAX_SUBSETS",
    "PERCENTILE_LEVELS",
]

DEFAULT_MAX_FRACTIONS = 1000
DEFAULT_MAX_SUBSETS = 1000
PERCENTILE_LEVELS = (75, 90, 95)


def percentile(values: Sequence[Rational], q: int) -> Rational:
    """Nearest-rank (inclusive) percentile of a nonempty sample."""
    if not values:
        raise ValueError("percentile of an empty sample")
    if not 0 < q <= 100:
        raise ValueError(f"percentile level must be in (0, 100], got {q}")
    ordered = sorted(values)
    idx = max(1, math.ceil(q * len(ordered) / 100))
    return ordered[idx - 1]


@dataclass
class RobustnessDistribution:
    """Robustness values of the size-(n-k) sub-fractions, with percentiles."""

    k: int
    samples: tuple[Rational, ...]
    exact: bool
    percentiles: dict[int, Rational] = field(default_factory=dict)
    r_star: Optional[Rational] = None

    def __post_init__(self):
        if not self.percentiles:
            self.percentiles = {q: percentile(self.samples, q) for q in PERCENTILE_LEVELS}


def _score_subfraction(kept: tuple[int, ...], live_masks: list[int], p: int, nbits: int,
                       max_subsets: int, seed: Seed) -> tuple[Rational, bool]:
    """Robustness of one sub-fraction given the supports surviving in it."""
    m = len(kept)
    total = comb(m, p)
    bits = [1 << r for r in kept]
    if total <= max_subsets:
        masks = (sum(c) for c in itertools.combinations(bits, p))
        sat = count_saturated(masks, live_masks, nbits, presorted=True)
        return Rational(sat, total), True
    rng = random.Random(seed)
    ranks = rng.sample(range(total), max_subsets)
    masks = (sum(bits[i] for i in _unrank_combination(rk, m, p)) for rk in ranks)
    sat = count_saturated(masks, live_masks, nbits, presorted=True)
    return Rational(sat, max_subsets), False


def _iter_subfractions(runs: tuple[int, ...], keep: int, max_fractions: int, seed: Seed):
    """All size-``keep`` subsets when few enough, else distinct sampled ones."""
    total = comb(len(runs), keep)
    if total <= max_fractions:
        yield from itertools.combinations(runs, keep)
        return
    rng = random.Random(seed)
    seen = set()
    runs_list = list(runs)
    while len(seen) < max_fractions:
        pick = tuple(sorted(rng.sample(runs_list, keep)))
        if pick not in seen:
            seen.add(pick)
            yield pick


def distribution(
    design: Design,
    model: ModelSpec,
    k: int,
    *,
    max_fractions: int = DEFAULT_MAX_FRACTIONS,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
    seed: Seed = 0,
    basis: Optional[CircuitBasis] = None,
    frac: Optional[Fraction] = None,
    workers: int = 1,
) -> RobustnessDistribution:
    """Distribution of robustness over the sub-fractions with k runs removed."""
    if frac is None:
        frac = Fraction.of(design, model)
    p, n = frac.p, frac.n
    if not 1 <= k <= n - p:
        raise ValueError(f"k must lie in [1, {n - p}], got {k}")
    if basis is None:
        basis = enumerate_circuits(frac.base_matrix, reduced=True, workers=workers)
    ambient = [m for m in basis.masks_by_size() if m & frac.mask == m]
    # the per-subfraction support filter is the hot loop; vectorize it when
    # the run space fits a machine word
    ambient_arr = np.array(ambient, dtype=np.uint64) if basis.n <= 63 else None
    keep = n - k
    exhaustive = comb(n, k) <= max_fractions
    samples: list[Rational] = []
    all_exact = exhaustive
    for i, kept in enumerate(_iter_subfractions(frac.runs, keep, max_fractions, f"{seed}:frac:{k}")):
        sub_mask = 0
        for r in kept:
            sub_mask |= 1 << r
        if ambient_arr is not None:
            live = ambient_arr[(ambient_arr & ~np.uint64(sub_mask)) == 0].tolist()
        else:
            live = [m for m in ambient if m & sub_mask == m]
        value, was_exact = _score_subfraction(
            kept, live, p, basis.n, max_subsets, f"{seed}:score:{k}:{i}"
        )
        all_exact = all_exact and was_exact
        samples.append(value)
    return RobustnessDistribution(k=k, samples=tuple(samples), exact=all_exact)


@dataclass
class BenchReport:
    """Greedy trace plus per-k distributions, ready to serialize."""

    design_n: int
    p: int
    target: int
    trace: RemovalTrace
    distributions: tuple[RobustnessDistribution, ...]

    @property
    def r0(self) -> Rational:
        return self.trace.start_robustness.value

    def table_rows(self) -> list[tuple]:
        rows = [(0, self.r0, self.r0, self.r0, self.r0)]
        for d in self.distributions:
            r_star = d.r_star
            rows.append((d.k, d.percentiles[75], d.percentiles[90], d.percentiles[95], r_star))
        return rows


def bench_report(
    design: Design,
    model: ModelSpec,
    target: int,
    seed: Seed = 0,
    *,
    max_fractions: int = DEFAULT_MAX_FRACTIONS,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
    trace_exact_cap: Optional[int] = None,
    trace_sample_size: Optional[int] = None,
    workers: int = 1,
) -> BenchReport:
    """Run the greedy sequence, then the distribution for every k it covers."""
    from .removal import TRACE_EXACT_CAP, TRACE_SAMPLE_SIZE

    frac = Fraction.of(design, model)
    basis = enumerate_circuits(frac.base_matrix, reduced=True, workers=workers)
    trace = nested_sequence(
        design,
        model,
        target,
        seed,
        basis=basis,
        exact_cap=trace_exact_cap if trace_exact_cap is not None else TRACE_EXACT_CAP,
        sample_size=trace_sample_size if trace_sample_size is not None else TRACE_SAMPLE_SIZE,
    )
    dists = []
    for k in range(1, frac.n - target + 1):
        d = distribution(
            design, model, k,
            max_fractions=max_fractions, max_subsets=max_subsets,
            seed=seed, basis=basis, frac=frac,
        )
        d.r_star = trace.steps[k - 1].robustness.value
        dists.append(d)
    return BenchReport(design_n=frac.n, p=frac.p, target=target, trace=trace,
                       distributions=tuple(dists))


def _decimal(v: Rational) -> str:
    return f"{float(v):.10g}"


def write_report(report: BenchReport, out_dir) -> list[Path]:
    """Write ``table.csv`` plus one ``dist_k<K>.csv`` per k (k = 0 holds r0)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    table = out / "table.csv"
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("k", "p75", "p90", "p95", "r_star"))
        for row in report.table_rows():
            w.writerow((row[0],) + tuple(_decimal(v) for v in row[1:]))
    written.append(table)
    zero = out / "dist_k0.csv"
    zero.write_text(_decimal(report.r0) + "\n")
    written.append(zero)
    for d in report.distributions:
        path = out / f"dist_k{d.k}.csv"
        with open(path, "w") as fh:
            for v in d.samples:
                fh.write(_decimal(v) + "\n")
        written.append(path)
    return written
