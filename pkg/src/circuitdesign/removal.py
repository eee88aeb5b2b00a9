"""Greedy one-at-a-time run removal producing a nested sequence of fractions.

Each step scores every surviving run by the loss function

    L(P) = sum over surviving circuits u through P of C(n' - |supp u|, p - |supp u|)

with n' the current fraction size, removes one run drawn uniformly from the
argmax set, and records the robustness of the resulting sub-fraction.  The
circuit basis is computed once for the starting fraction; afterwards the
surviving circuits of every sub-fraction are obtained by support filtering,
which is exactly the restriction property of circuits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from math import comb
from typing import Optional

from .circuits import Circuit, CircuitBasis, enumerate_circuits
from .designs import Design, ModelSpec
from .errors import CircuitDesignError
from .linalg import Rational
from .robustness import Fraction, RobustnessValue, Seed, robustness_exact, robustness_sampled

__all__ = ["RemovalStep", "RemovalTrace", "loss", "remove_step", "nested_sequence",
           "TRACE_EXACT_CAP", "TRACE_SAMPLE_SIZE"]

TRACE_EXACT_CAP = 100_000
TRACE_SAMPLE_SIZE = 1000


class CannotRemoveError(CircuitDesignError, ValueError):
    """The fraction is already minimal; no run can be removed."""


@dataclass(frozen=True)
class RemovalStep:
    """One removal: who was scored, who tied, who left, what remained."""

    k: int
    removed: int
    removed_label: str
    removed_levels: tuple
    tie_set: tuple[int, ...]
    losses: dict[int, int]
    surviving_circuits: int
    robustness: Optional[RobustnessValue] = None


@dataclass(frozen=True)
class RemovalTrace:
    """Full record of a greedy removal down to the target size."""

    seed: Seed
    p: int
    target: int
    start_runs: tuple[int, ...]
    start_circuits: int
    start_robustness: RobustnessValue
    steps: tuple[RemovalStep, ...]
    final: Fraction

    def robustness_sequence(self) -> list[Rational]:
        """Robustness at sizes n, n-1, ..., target."""
        return [self.start_robustness.value] + [s.robustness.value for s in self.steps]

    def run_order(self) -> list[int]:
        """Experiment ordering: the final fraction first, then the removed
        runs in reverse removal order, growing back to the full fraction."""
        return list(self.final.runs) + [s.removed for s in reversed(self.steps)]


def _binomial_weight(fraction_size: int, support_size: int, p: int) -> int:
    if support_size > p:
        return 0
    return comb(fraction_size - support_size, p - support_size)


def _loss_scores(live: list[Circuit], runs: tuple[int, ...], p: int) -> dict[int, int]:
    n2 = len(runs)
    scores = {r: 0 for r in runs}
    weight_cache: dict[int, int] = {}
    for c in live:
        s = len(c.support)
        w = weight_cache.get(s)
        if w is None:
            w = _binomial_weight(n2, s, p)
            weight_cache[s] = w
        if w:
            for r in c.support:
                scores[r] += w
    return scores


def _surviving(basis_or_list, frac_mask: int) -> list[Circuit]:
    circuits = basis_or_list.circuits if isinstance(basis_or_list, CircuitBasis) else basis_or_list
    return [c for c in circuits if c.mask & frac_mask == c.mask]


def loss(b: CircuitBasis, f: Fraction, run: int) -> int:
    """Loss of one run of the fraction under the surviving circuits of ``b``."""
    if run not in f.runs:
        raise ValueError(f"run {run} is not part of the fraction")
    live = _surviving(b, f.mask)
    return _loss_scores(live, f.runs, f.p)[run]


def remove_step(b: CircuitBasis, f: Fraction, rng: random.Random) -> tuple[Fraction, RemovalStep]:
    """Remove one run with maximal loss, randomizing uniformly over ties.

    When no surviving circuit touches the fraction every loss is zero and
    the tie set is the whole fraction.  The step's robustness field is left
    unset; sequence drivers fill it under their own caps.
    """
    if f.n <= f.p:
        raise CannotRemoveError(f"fraction already has p = {f.p} runs")
    live = _surviving(b, f.mask)
    scores = _loss_scores(live, f.runs, f.p)
    top = max(scores.values())
    ties = tuple(sorted(r for r, v in scores.items() if v == top))
    removed = ties[rng.randrange(len(ties))]
    sub = f.sub(r for r in f.runs if r != removed)
    surviving_after = sum(1 for c in live if not (c.mask >> removed) & 1)
    step = RemovalStep(
        k=0,
        removed=removed,
        removed_label=f.design.labels[removed],
        removed_levels=f.design.runs[removed],
        tie_set=ties,
        losses=scores,
        surviving_circuits=surviving_after,
    )
    return sub, step


def _step_rng(seed: Seed, step: int) -> random.Random:
    return random.Random(f"{seed}:step:{step}")


def _record_robustness(f: Fraction, b: CircuitBasis, exact_cap: int, sample_size: int,
                       seed: Seed, tag: str) -> RobustnessValue:
    if comb(f.n, f.p) <= exact_cap:
        return robustness_exact(f, b, cap=exact_cap)
    return robustness_sampled(f, b, sample_size, seed=f"{seed}:{tag}")


def nested_sequence(
    design: Design,
    model: ModelSpec,
    target_size: int,
    seed: Seed = 0,
    *,
    basis: Optional[CircuitBasis] = None,
    exact_cap: int = TRACE_EXACT_CAP,
    sample_size: int = TRACE_SAMPLE_SIZE,
    workers: int = 1,
) -> RemovalTrace:
    """Greedy removal from the whole design down to ``target_size`` runs.

    The reduced circuit basis is enumerated once for the starting fraction
    (or taken from ``basis``); the trace is fully determined by the seed.
    Robustness is recorded exactly while C(size, p) stays within
    ``exact_cap`` and by seeded sampling of ``sample_size`` subsets beyond.
    """
    frac = Fraction.of(design, model)
    p, n = frac.p, frac.n
    if not p <= target_size <= n:
        raise ValueError(f"target size must lie in [{p}, {n}], got {target_size}")
    if basis is None:
        basis = enumerate_circuits(frac.base_matrix, reduced=True, workers=workers)
    elif basis.n != n:
        raise ValueError(f"basis indexes {basis.n} runs but the design has {n}")
    start_live = _surviving(basis, frac.mask)
    r0 = _record_robustness(frac, basis, exact_cap, sample_size, seed, "rob:0")
    steps: list[RemovalStep] = []
    for k in range(1, n - target_size + 1):
        frac, step = remove_step(basis, frac, _step_rng(seed, k))
        rv = _record_robustness(frac, basis, exact_cap, sample_size, seed, f"rob:{k}")
        steps.append(replace(step, k=k, robustness=rv))
    return RemovalTrace(
        seed=seed,
        p=p,
        target=target_size,
        start_runs=tuple(range(n)),
        start_circuits=len(start_live),
        start_robustness=r0,
        steps=tuple(steps),
        final=frac,
    )
