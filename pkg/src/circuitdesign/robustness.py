"""Saturation tests and exact or sampled design robustness.

The robustness of an n-run fraction under a p-parameter model is the share
of its C(n, p) minimal sub-fractions on which all parameters are estimable.
A minimal sub-fraction is saturated exactly when it contains no circuit
support, so the circuit basis of the ambient fraction answers every
saturation query; an independent determinant test is kept alongside as an
oracle.  Counting over many subsets is vectorized over bitmasks.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .circuits import CircuitBasis
from .designs import Design, ModelSpec, model_matrix
from .errors import SizeLimitError
from .linalg import IntegerMatrix, Rational, determinant

__all__ = [
    "Fraction",
    "RobustnessValue",
    "is_saturated_circuits",
    "is_saturated_det",
    "robustness_exact",
    "robustness_sampled",
    "EXACT_ENUMERATION_CAP",
]

EXACT_ENUMERATION_CAP = 10_000_000

Seed = Union[int, str]


@dataclass(frozen=True)
class Fraction:
    """A run subset of a base design together with its model-matrix columns.

    ``runs`` are indices into the base design; ``matrix`` is the p x |runs|
    column selection of the base matrix, so the same circuit basis (indexed
    by base runs) serves every nested sub-fraction.
    """

    design: Design
    model: ModelSpec
    runs: tuple[int, ...]
    base_matrix: IntegerMatrix
    matrix: IntegerMatrix

    @classmethod
    def of(cls, design: Design, model: ModelSpec, runs: Optional[Sequence[int]] = None) -> "Fraction":
        base = model_matrix(design, model)
        if runs is None:
            sel = tuple(range(design.n))
        else:
            sel = tuple(sorted(set(runs)))
            if sel and not (0 <= sel[0] and sel[-1] < design.n):
                raise ValueError(f"run index out of range 0..{design.n - 1}")
        return cls(design, model, sel, base, base.select_columns(sel))

    def sub(self, runs: Iterable[int]) -> "Fraction":
        sel = tuple(sorted(set(runs)))
        if not set(sel) <= set(self.runs):
            raise ValueError("sub-fraction runs must be a subset of the fraction's runs")
        return Fraction(self.design, self.model, sel, self.base_matrix,
                        self.base_matrix.select_columns(sel))

    @property
    def p(self) -> int:
        return self.base_matrix.rows

    @property
    def n(self) -> int:
        return len(self.runs)

    @property
    def mask(self) -> int:
        m = 0
        for r in self.runs:
            m |= 1 << r
        return m

    def labels(self) -> tuple[str, ...]:
        return tuple(self.design.labels[r] for r in self.runs)


@dataclass(frozen=True)
class RobustnessValue:
    """An exact ratio of saturated minimal sub-fractions, with provenance."""

    value: Rational
    saturated_count: int
    total_count: int
    method: str  # "exact" or "sampled"
    sample_seed: Optional[Seed] = None

    def decimal(self, places: int = 4) -> str:
        scaled = round(self.value * 10**places)
        text = f"{scaled:0{places + 1}d}"
        return f"{text[:-places]}.{text[-places:]}"

    def ratio_str(self) -> str:
        return f"{self.value.numerator}/{self.value.denominator}"

    def __float__(self) -> float:
        return float(self.value)


def _subset_mask(subset: Iterable[int]) -> int:
    m = 0
    for r in subset:
        m |= 1 << r
    return m


def is_saturated_circuits(b: CircuitBasis, subset: Iterable[int]) -> bool:
    """True iff no circuit support of ``b`` lies inside the p-run subset.

    Scans supports smallest first and stops at the first one contained in
    the subset, which is the common case for unsaturated subsets.
    """
    sub = tuple(subset)
    if len(sub) != b.p:
        raise ValueError(f"subset has {len(sub)} runs, expected p = {b.p}")
    sm = _subset_mask(sub)
    for cm in b.masks_by_size():
        if cm & sm == cm:
            return False
    return True


def is_saturated_det(f: Fraction, subset: Iterable[int]) -> bool:
    """Determinant-based saturation oracle: the p x p minor must be nonsingular."""
    sub = tuple(subset)
    if len(sub) != f.p:
        raise ValueError(f"subset has {len(sub)} runs, expected p = {f.p}")
    pos = []
    for r in sub:
        try:
            pos.append(f.runs.index(r))
        except ValueError:
            raise ValueError(f"run {r} is not part of the fraction") from None
    return determinant(f.matrix.select_columns(pos)) != 0


def _live_masks(b: CircuitBasis, frac_mask: int) -> list[int]:
    """Supports that can still occur inside the fraction, smallest first."""
    return [m for m in b.masks_by_size() if m & frac_mask == m]


def count_saturated(subset_masks, live_masks: Sequence[int], nbits: int, *,
                    presorted: bool = False) -> int:
    """How many subset bitmasks contain no support bitmask.

    Vectorized over numpy uint64 when the run space fits; all arithmetic is
    integer bit manipulation, exact either way.  Supports are scanned
    smallest first (pass ``presorted=True`` when they already are).
    """
    supports = live_masks if presorted else sorted(live_masks, key=lambda m: bin(m).count("1"))
    if nbits <= 63:
        arr = np.fromiter(subset_masks, dtype=np.uint64)
        total = arr.size
        if not len(supports):
            return int(total)
        if len(supports) > 4 * total:
            # few subsets against many supports: one vectorized containment
            # scan per subset beats looping over the supports
            sup_arr = np.array(list(supports), dtype=np.uint64)
            sat = 0
            for sm in arr.tolist():
                if not ((sup_arr & sm) == sup_arr).any():
                    sat += 1
            return sat
        remaining = arr
        dead = 0
        for s in supports:
            sv = np.uint64(s)
            hit = (remaining & sv) == sv
            nh = int(np.count_nonzero(hit))
            if nh:
                dead += nh
                remaining = remaining[~hit]
                if remaining.size == 0:
                    break
        return int(total - dead)
    sat = 0
    for sm in subset_masks:
        for s in supports:
            if s & sm == s:
                break
        else:
            sat += 1
    return sat


def _count_exact(runs: Sequence[int], p: int, live_masks: Sequence[int], nbits: int) -> tuple[int, int]:
    total = comb(len(runs), p)
    bits = [1 << r for r in runs]
    masks = (sum(c) for c in itertools.combinations(bits, p))
    return count_saturated(masks, live_masks, nbits, presorted=True), total


def _unrank_combination(r: int, n: int, k: int) -> list[int]:
    """The combination of rank ``r`` in lexicographic order of k-subsets of 0..n-1."""
    out = []
    v = 0
    for i in range(k):
        while True:
            c = comb(n - 1 - v, k - 1 - i)
            if r < c:
                break
            r -= c
            v += 1
        out.append(v)
        v += 1
    return out


def robustness_exact(f: Fraction, b: CircuitBasis, *, cap: int = EXACT_ENUMERATION_CAP) -> RobustnessValue:
    """Exact robustness by enumerating every p-subset of the fraction's runs."""
    p = f.p
    total = comb(f.n, p)
    if total > cap:
        raise SizeLimitError(
            f"C({f.n},{p}) = {total} p-subsets exceed the cap of {cap}; use robustness_sampled"
        )
    live = _live_masks(b, f.mask)
    sat, total = _count_exact(f.runs, p, live, b.n)
    return RobustnessValue(Rational(sat, total), sat, total, "exact")


def robustness_sampled(f: Fraction, b: CircuitBasis, max_subsets: int, seed: Seed = 0) -> RobustnessValue:
    """Robustness over p-subsets sampled uniformly without replacement.

    Draws min(C(n, p), max_subsets) distinct subsets by sampling subset
    ranks and unranking, so the estimate is reproducible for a given seed.
    When everything fits, this is just the exact computation.
    """
    p = f.p
    total = comb(f.n, p)
    if total <= max_subsets:
        return robustness_exact(f, b, cap=max(total, 1))
    live = _live_masks(b, f.mask)
    rng = random.Random(seed)
    ranks = rng.sample(range(total), max_subsets)
    bits = [1 << r for r in f.runs]
    masks = (sum(bits[i] for i in _unrank_combination(rk, f.n, p)) for rk in ranks)
    sat = count_saturated(masks, live, b.n, presorted=True)
    return RobustnessValue(Rational(sat, max_subsets), sat, max_subsets, "sampled", seed)
