"""Circuit basis enumeration for integer model matrices.

A circuit of a full-rank ``p x n`` integer matrix ``A`` is an integer kernel
vector with inclusion-minimal support, coprime entries, and (here) first
nonzero entry positive.  The finite set of all circuits is enumerated by a
depth-first search over column subsets that only ever extends linearly
independent subsets, maintaining fraction-free elimination state along the
search path so each independence test costs a single column update.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import RankError
from .linalg import IntegerMatrix, _normalize_primitive, rank

__all__ = ["Circuit", "CircuitBasis", "enumerate_circuits", "reduce_basis", "restrict"]


@dataclass(frozen=True)
class Circuit:
    """A kernel vector with minimal support, stored sparsely.

    ``support`` holds the run indices with nonzero entries, ascending;
    ``entries`` holds the matching nonzero values.
    """

    support: tuple[int, ...]
    entries: tuple[int, ...]
    mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = 0
        for i in self.support:
            m |= 1 << i
        object.__setattr__(self, "mask", m)

    def dense(self, n: int) -> list[int]:
        out = [0] * n
        for i, v in zip(self.support, self.entries):
            out[i] = v
        return out

    def size(self) -> int:
        return len(self.support)


class CircuitBasis:
    """The set of circuits of a ``p x n`` matrix, ordered by support.

    Also carries an index from run to the circuits through it, used for
    fast filtering when runs are removed.
    """

    __slots__ = ("circuits", "p", "n", "_support_index", "_masks", "_masks_by_size")

    def __init__(self, circuits: Iterable[Circuit], p: int, n: int):
        self.circuits: tuple[Circuit, ...] = tuple(
            sorted(circuits, key=lambda c: (c.support, c.entries))
        )
        self.p = p
        self.n = n
        self._support_index: Optional[dict[int, tuple[int, ...]]] = None
        self._masks: Optional[list[int]] = None
        self._masks_by_size: Optional[list[int]] = None

    @property
    def matrix_dims(self) -> tuple[int, int]:
        return (self.p, self.n)

    @property
    def support_index(self) -> dict[int, tuple[int, ...]]:
        if self._support_index is None:
            idx: dict[int, list[int]] = {r: [] for r in range(self.n)}
            for ci, c in enumerate(self.circuits):
                for r in c.support:
                    idx[r].append(ci)
            self._support_index = {r: tuple(v) for r, v in idx.items()}
        return self._support_index

    def masks(self) -> list[int]:
        if self._masks is None:
            self._masks = [c.mask for c in self.circuits]
        return self._masks

    def masks_by_size(self) -> list[int]:
        if self._masks_by_size is None:
            self._masks_by_size = sorted(self.masks(), key=lambda m: bin(m).count("1"))
        return self._masks_by_size

    def support_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for c in self.circuits:
            hist[c.size()] = hist.get(c.size(), 0) + 1
        return hist

    def __len__(self) -> int:
        return len(self.circuits)

    def __iter__(self) -> Iterator[Circuit]:
        return iter(self.circuits)

    def __getitem__(self, i: int) -> Circuit:
        return self.circuits[i]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CircuitBasis)
            and self.matrix_dims == other.matrix_dims
            and self.circuits == other.circuits
        )

    def __repr__(self) -> str:
        return f"CircuitBasis({len(self.circuits)} circuits of {self.p}x{self.n})"

    def to_text(self) -> str:
        """One circuit per line: n space-separated integers in run order."""
        return "\n".join(" ".join(str(x) for x in c.dense(self.n)) for c in self.circuits)

    def to_json_obj(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "circuits": [
                {"support": list(c.support), "entries": list(c.entries)} for c in self.circuits
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _dfs(path_len: int, cand: list, prev: int, max_support: int, out: list, prefix: tuple):
    """Extend one independent column subset.

    ``cand`` holds ``(col, reduced, coeffs)`` for every column after the last
    path element: ``reduced`` is the column modulo the span of the path
    columns (fraction-free, scaled by the path's pivot chain) and ``coeffs``
    expresses that residual as an integer combination of the path columns
    plus the column itself (length ``path_len + 1``, self last).
    """
    can_extend = path_len + 2 <= max_support
    for i, (c, r, aug) in enumerate(cand):
        if not any(r):
            # Dependent extension: a circuit exactly when the dependency
            # involves every column on the path.
            if all(aug):
                entries = tuple(_normalize_primitive(list(aug)))
                out.append(Circuit(prefix + (c,), entries))
            continue
        if not can_extend or i + 1 == len(cand):
            continue
        pos = next(j for j, x in enumerate(r) if x)
        lead = r[pos]
        k = path_len
        aug_head = aug[:k]
        aug_self = aug[k]
        newcand = []
        for (d, rd, augd) in cand[i + 1 :]:
            f = rd[pos]
            if f:
                nr = [(lead * x - f * y) // prev for x, y in zip(rd, r)]
                na = [(lead * x - f * y) // prev for x, y in zip(augd[:k], aug_head)]
                na.append((-f * aug_self) // prev)
                na.append((lead * augd[k]) // prev)
            else:
                nr = [(lead * x) // prev for x in rd]
                na = [(lead * x) // prev for x in augd[:k]]
                na.append(0)
                na.append((lead * augd[k]) // prev)
            newcand.append((d, nr, na))
        if newcand:
            _dfs(k + 1, newcand, lead, max_support, out, prefix + (c,))


def _enumerate_from(columns: Sequence[tuple[int, ...]], first: int, max_support: int) -> list[Circuit]:
    """All circuits whose minimum support element is ``first``."""
    out: list[Circuit] = []
    r = list(columns[first])
    if not any(r):
        out.append(Circuit((first,), (1,)))
        return out
    if max_support < 2:
        return out
    pos = next(j for j, x in enumerate(r) if x)
    lead = r[pos]
    newcand = []
    for d in range(first + 1, len(columns)):
        rd = list(columns[d])
        f = rd[pos]
        if f:
            nr = [lead * x - f * y for x, y in zip(rd, r)]
            na = [-f, lead]
        else:
            nr = [lead * x for x in rd]
            na = [0, lead]
        newcand.append((d, nr, na))
    if newcand:
        _dfs(1, newcand, lead, max_support, out, (first,))
    return out


def _worker(args) -> list[Circuit]:
    columns, first, max_support = args
    return _enumerate_from(columns, first, max_support)


def enumerate_circuits(
    m: IntegerMatrix,
    *,
    reduced: bool = False,
    max_support: Optional[int] = None,
    workers: int = 1,
) -> CircuitBasis:
    """Enumerate the circuit basis of a full-rank ``p x n`` matrix.

    With ``reduced=True`` only circuits with support on at most ``p`` runs
    are generated (subsets beyond that size are never visited); otherwise
    the support cap is ``p + 1``, which bounds every circuit.  The result
    is deterministic and sorted by support regardless of ``workers``.
    """
    p, n = m.rows, m.cols
    if rank(m) != p:
        raise RankError(f"matrix is not full-rank: rank < {p} rows (or p > n)")
    cap = max_support if max_support is not None else (p if reduced else p + 1)
    columns = m.columns()
    out: list[Circuit] = []
    if workers > 1 and n >= 12:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for chunk in ex.map(_worker, [(columns, c, cap) for c in range(n)]):
                out.extend(chunk)
    else:
        for c in range(n):
            out.extend(_enumerate_from(columns, c, cap))
    return CircuitBasis(out, p, n)


def reduce_basis(b: CircuitBasis) -> CircuitBasis:
    """Drop circuits with support on ``p + 1`` runs; they sit in no minimal fraction."""
    return CircuitBasis([c for c in b if c.size() <= b.p], b.p, b.n)


def restrict(b: CircuitBasis, subfraction: Union[Sequence[int], set, frozenset]) -> CircuitBasis:
    """Circuits of ``b`` surviving on a run subset, re-indexed to its column order.

    The circuits of the column-selected matrix are exactly the circuits of
    the ambient matrix whose support lies inside the subset.
    """
    if isinstance(subfraction, (set, frozenset)):
        order = sorted(subfraction)
    else:
        order = list(subfraction)
        if len(set(order)) != len(order):
            raise ValueError("subfraction contains duplicate run indices")
    for r in order:
        if not 0 <= r < b.n:
            raise ValueError(f"run index {r} out of range 0..{b.n - 1}")
    posmap = {r: i for i, r in enumerate(order)}
    mask = 0
    for r in order:
        mask |= 1 << r
    kept = []
    for c in b:
        if c.mask & mask == c.mask:
            pairs = sorted((posmap[r], v) for r, v in zip(c.support, c.entries))
            support = tuple(i for i, _ in pairs)
            entries = tuple(_normalize_primitive([v for _, v in pairs]))
            kept.append(Circuit(support, entries))
    return CircuitBasis(kept, b.p, len(order))
