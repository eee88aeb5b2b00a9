"""Designs and integer model matrices.

Builds mixed-level full factorials, the 12-run Plackett-Burman design, the
27-run strength-2 orthogonal array for four 3-level factors, and imports
arbitrary designs from CSV.  Model terms (intercept, main effects,
interactions, powers) are assembled into an exact integer matrix with runs
as columns: qualitative factors are coded by integer orthogonal-polynomial
contrasts, quantitative factors by their rational level values with each
matrix row cleared to integers by its least common denominator.  Row
scaling and contrast choice leave the kernel (hence the circuits) of the
matrix unchanged.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm, prod
from pathlib import Path
from typing import Sequence, Union

from .errors import ModelError, ParseError, SizeLimitError
from .linalg import IntegerMatrix, Rational, rank

__all__ = [
    "FactorSpec",
    "ModelSpec",
    "Design",
    "full_factorial",
    "plackett_burman_12",
    "orthogonal_array_3_4",
    "load_design_csv",
    "save_design_csv",
    "load_model_json",
    "model_matrix",
]

Level = Union[int, Rational]

FULL_FACTORIAL_CAP = 10_000_000

PB12_FIRST_ROW = (1, 1, -1, 1, 1, 1, -1, -1, -1, 1, -1)


def _as_rational(value) -> Rational:
    return value if isinstance(value, Rational) else Rational(value)


def _simplify(value: Rational) -> Level:
    return int(value) if value.denominator == 1 else value


@lru_cache(maxsize=None)
def orthogonal_contrasts(s: int) -> tuple[tuple[int, ...], ...]:
    """Primitive integer orthogonal-polynomial contrasts for s equally spaced levels.

    Gram-Schmidt on 1, x, ..., x^(s-1) over the points 0..s-1, each contrast
    scaled to coprime integers with positive last entry.  For s = 2 this is
    (-1, 1); for s = 3 it is (-1, 0, 1) and (1, -2, 1).
    """
    points = [Rational(i) for i in range(s)]
    basis: list[list[Rational]] = [[Rational(1)] * s]
    out: list[tuple[int, ...]] = []
    for deg in range(1, s):
        vec = [x**deg for x in points]
        for prev in basis:
            num = sum(a * b for a, b in zip(vec, prev))
            den = sum(a * a for a in prev)
            coef = num / den
            vec = [a - coef * b for a, b in zip(vec, prev)]
        basis.append(vec)
        denoms = lcm(*(v.denominator for v in vec))
        ints = [int(v * denoms) for v in vec]
        g = 0
        for x in ints:
            g = gcd(g, x)
        ints = [x // g for x in ints]
        if ints[-1] < 0:
            ints = [-x for x in ints]
        out.append(tuple(ints))
    return tuple(out)


@dataclass(frozen=True)
class FactorSpec:
    """One experimental factor: a name, its levels, and how it enters the model.

    Qualitative factors contribute s-1 contrast rows per main effect;
    quantitative factors contribute their (rational) level values directly.
    """

    name: str
    levels: tuple[Level, ...]
    quantitative: bool = False

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ModelError(f"factor {self.name!r} needs at least 2 levels")
        vals = [_as_rational(v) for v in self.levels]
        if len(set(vals)) != len(vals):
            raise ModelError(f"factor {self.name!r} has duplicate levels")

    @property
    def s(self) -> int:
        return len(self.levels)

    def level_index(self, value) -> int:
        v = _as_rational(value)
        for i, lv in enumerate(self.levels):
            if _as_rational(lv) == v:
                return i
        raise ModelError(f"value {value!r} is not a declared level of factor {self.name!r}")

    def contrasts(self) -> tuple[tuple[int, ...], ...]:
        return orthogonal_contrasts(self.s)


Term = tuple  # ("intercept",) | ("main", name) | ("interaction", (names,)) | ("power", name, degree)


def parse_term(text: str) -> Term:
    t = text.strip()
    if t == "1":
        return ("intercept",)
    if "*" in t:
        names = tuple(x.strip() for x in t.split("*"))
        if len(names) < 2 or any(not x for x in names):
            raise ParseError(f"bad interaction term {text!r}")
        return ("interaction", names)
    if "^" in t:
        name, _, deg = t.partition("^")
        try:
            d = int(deg)
        except ValueError:
            raise ParseError(f"bad power term {text!r}") from None
        if not name.strip() or d < 1:
            raise ParseError(f"bad power term {text!r}")
        return ("power", name.strip(), d)
    if not t:
        raise ParseError("empty model term")
    return ("main", t)


def term_text(term: Term) -> str:
    kind = term[0]
    if kind == "intercept":
        return "1"
    if kind == "main":
        return term[1]
    if kind == "interaction":
        return "*".join(term[1])
    return f"{term[1]}^{term[2]}"


@dataclass(frozen=True)
class ModelSpec:
    """A list of factors and model terms, with the implied parameter count."""

    factors: tuple[FactorSpec, ...]
    terms: tuple[Term, ...]

    def __post_init__(self):
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ModelError("duplicate factor names")
        for t in self.terms:
            for nm in self._term_factor_names(t):
                if nm not in names:
                    raise ModelError(f"term {term_text(t)!r} references unknown factor {nm!r}")
        for t in self.terms:
            if t[0] == "power" and not self.factor(t[1]).quantitative:
                raise ModelError(f"power term {term_text(t)!r} needs a quantitative factor")

    @staticmethod
    def _term_factor_names(term: Term) -> tuple[str, ...]:
        kind = term[0]
        if kind == "intercept":
            return ()
        if kind == "interaction":
            return term[1]
        return (term[1],)

    def factor(self, name: str) -> FactorSpec:
        for f in self.factors:
            if f.name == name:
                return f
        raise ModelError(f"unknown factor {name!r}")

    def term_width(self, term: Term) -> int:
        kind = term[0]
        if kind == "intercept":
            return 1
        if kind == "main":
            f = self.factor(term[1])
            return 1 if f.quantitative else f.s - 1
        if kind == "power":
            return 1
        w = 1
        for nm in term[1]:
            f = self.factor(nm)
            w *= 1 if f.quantitative else f.s - 1
        return w

    @property
    def p(self) -> int:
        return sum(self.term_width(t) for t in self.terms)

    def run_column(self, levels: Sequence[Level]) -> list[Rational]:
        """The p model values of a single run, given levels in factor order."""
        idx = {f.name: i for i, f in enumerate(self.factors)}
        out: list[Rational] = []
        for t in self.terms:
            out.extend(self._term_values(t, levels, idx))
        return out

    def _term_values(self, term: Term, levels, idx) -> list[Rational]:
        kind = term[0]
        if kind == "intercept":
            return [Rational(1)]
        if kind == "main":
            f = self.factor(term[1])
            v = levels[idx[f.name]]
            if f.quantitative:
                return [_as_rational(v)]
            li = f.level_index(v)
            return [Rational(c[li]) for c in f.contrasts()]
        if kind == "power":
            f = self.factor(term[1])
            return [_as_rational(levels[idx[f.name]]) ** term[2]]
        parts: list[list[Rational]] = []
        for nm in term[1]:
            f = self.factor(nm)
            v = levels[idx[f.name]]
            if f.quantitative:
                parts.append([_as_rational(v)])
            else:
                li = f.level_index(v)
                parts.append([Rational(c[li]) for c in f.contrasts()])
        return [prod(combo) for combo in itertools.product(*parts)]

    def validate_full_rank(self) -> None:
        """Check the model matrix has rank p on the factors' full factorial.

        Scans factorial runs in a scrambled deterministic order and stops as
        soon as p independent columns are found, so well-posed models are
        verified after a handful of runs regardless of factorial size.
        """
        sizes = [f.s for f in self.factors]
        total = prod(sizes)
        p = self.p
        stride = 1 + int(total * 0.6180339887)
        while gcd(stride, total) != 1:
            stride += 1
        pivots: list[tuple[int, list[Rational]]] = []
        for j in range(total):
            k = (j * stride) % total
            digits = []
            for s in reversed(sizes):
                digits.append(k % s)
                k //= s
            levels = [f.levels[d] for f, d in zip(self.factors, reversed(digits))]
            col = self.run_column(levels)
            for pos, pv in pivots:
                c = col[pos]
                if c:
                    col = [a - c / pv[pos] * b for a, b in zip(col, pv)]
            posn = next((i for i, x in enumerate(col) if x), None)
            if posn is not None:
                pivots.append((posn, col))
                if len(pivots) == p:
                    return
        raise ModelError(
            f"model is rank-deficient: only {len(pivots)} of {p} parameters "
            "are estimable on the full factorial"
        )


@dataclass(frozen=True)
class Design:
    """An ordered list of runs, each a tuple of level values per factor."""

    factor_names: tuple[str, ...]
    runs: tuple[tuple[Level, ...], ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.runs):
            raise ModelError("labels and runs differ in length")
        for i, r in enumerate(self.runs):
            if len(r) != len(self.factor_names):
                raise ModelError(f"run {self.labels[i]!r} has {len(r)} values, expected {len(self.factor_names)}")

    @property
    def n(self) -> int:
        return len(self.runs)

    def column(self, name: str) -> int:
        try:
            return self.factor_names.index(name)
        except ValueError:
            raise ModelError(f"design has no factor named {name!r}") from None


def full_factorial(factors: Sequence[FactorSpec], max_runs: int = FULL_FACTORIAL_CAP) -> Design:
    """Cartesian product of the factor levels, first factor varying slowest."""
    if not factors:
        raise ModelError("need at least one factor")
    total = prod(f.s for f in factors)
    if total > max_runs:
        raise SizeLimitError(f"full factorial would have {total} runs, above the cap of {max_runs}")
    runs = tuple(itertools.product(*(f.levels for f in factors)))
    return Design(
        factor_names=tuple(f.name for f in factors),
        runs=runs,
        labels=tuple(str(i + 1) for i in range(total)),
    )


def plackett_burman_12() -> Design:
    """The 12-run, 11-column Plackett-Burman design.

    Row i is the generator row rotated right i times, the last row is all
    minus one.  A 5-factor main-effects design uses the first 5 columns.
    """
    rows = [PB12_FIRST_ROW[-i:] + PB12_FIRST_ROW[:-i] for i in range(11)]
    rows.append((-1,) * 11)
    return Design(
        factor_names=tuple(f"F{j + 1}" for j in range(11)),
        runs=tuple(rows),
        labels=tuple(str(i + 1) for i in range(12)),
    )


def orthogonal_array_3_4() -> Design:
    """OA(27, 3^4, strength 2): the 3^3 factorial plus X4 = X1+X2+X3 mod 3."""
    runs = tuple(
        (a, b, c, (a + b + c) % 3) for a in range(3) for b in range(3) for c in range(3)
    )
    return Design(
        factor_names=("X1", "X2", "X3", "X4"),
        runs=runs,
        labels=tuple(str(i + 1) for i in range(27)),
    )


def _parse_level(text: str, path, lineno: int) -> Level:
    t = text.strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return Rational(t)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{path}:{lineno}: cannot parse level value {text!r}") from None


def load_design_csv(path) -> Design:
    """Read a design from CSV: header ``run,<factor names...>``, one row per run.

    Level values may be integers or rationals written as ``a/b``.
    """
    p = Path(path)
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{p}: empty design file") from None
        if not header or header[0].strip().lower() != "run" or len(header) < 2:
            raise ParseError(f"{p}:1: header must be 'run,<factor names...>'")
        names = tuple(h.strip() for h in header[1:])
        runs: list[tuple[Level, ...]] = []
        labels: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{p}:{lineno}: expected {len(header)} fields, got {len(row)}")
            labels.append(row[0].strip())
            runs.append(tuple(_parse_level(c, p, lineno) for c in row[1:]))
    if not runs:
        raise ParseError(f"{p}: no runs in design file")
    return Design(factor_names=names, runs=tuple(runs), labels=tuple(labels))


def _level_text(v: Level) -> str:
    if isinstance(v, Rational) and v.denominator != 1:
        return f"{v.numerator}/{v.denominator}"
    return str(int(v))


def save_design_csv(design: Design, path_or_file) -> None:
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(("run",) + design.factor_names)
        for label, run in zip(design.labels, design.runs):
            w.writerow((label,) + tuple(_level_text(v) for v in run))
    finally:
        if own:
            fh.close()


def design_csv_text(design: Design) -> str:
    buf = io.StringIO()
    save_design_csv(design, buf)
    return buf.getvalue()


def load_model_json(path) -> ModelSpec:
    """Read a model from JSON with ``factors`` and ``terms`` arrays.

    Terms use the forms ``"1"``, ``"A"``, ``"A*B"``, ``"A^2"``.  Rational
    levels may be written as strings ``"a/b"``; fractional JSON numbers are
    parsed exactly.
    """
    p = Path(path)
    try:
        with open(p) as fh:
            obj = json.load(fh, parse_float=Rational)
    except json.JSONDecodeError as e:
        raise ParseError(f"{p}: invalid JSON: {e}") from None
    if not isinstance(obj, dict) or "factors" not in obj or "terms" not in obj:
        raise ParseError(f"{p}: model JSON needs 'factors' and 'terms' arrays")
    factors = []
    for fo in obj["factors"]:
        try:
            name = fo["name"]
            raw_levels = fo["levels"]
        except (TypeError, KeyError):
            raise ParseError(f"{p}: each factor needs 'name' and 'levels'") from None
        levels = []
        for v in raw_levels:
            if isinstance(v, str):
                levels.append(_parse_level(v, p, 0))
            elif isinstance(v, (int, Rational)):
                levels.append(_simplify(_as_rational(v)))
            else:
                raise ParseError(f"{p}: bad level {v!r} for factor {name!r}")
        factors.append(
            FactorSpec(name=name, levels=tuple(levels), quantitative=bool(fo.get("quantitative", False)))
        )
    terms = tuple(parse_term(t) for t in obj["terms"])
    spec = ModelSpec(factors=tuple(factors), terms=terms)
    spec.validate_full_rank()
    return spec


def model_matrix(design: Design, model: ModelSpec) -> IntegerMatrix:
    """The p x n integer model matrix of a design (runs as columns).

    Rows are model terms; rational rows are cleared to integers by their
    least common denominator.  Raises ModelError if the result is not
    full-rank, since every downstream computation requires rank p.
    """
    colmap = [design.column(f.name) for f in model.factors]
    p = model.p
    cols: list[list[Rational]] = []
    for i, run in enumerate(design.runs):
        levels = [run[j] for j in colmap]
        try:
            cols.append(model.run_column(levels))
        except ModelError as e:
            raise ModelError(f"run {design.labels[i]!r}: {e}") from None
    rows: list[list[int]] = []
    for r in range(p):
        vals = [c[r] for c in cols]
        den = lcm(*(v.denominator for v in vals)) if vals else 1
        rows.append([int(v * den) for v in vals])
    m = IntegerMatrix(rows)
    if rank(m) != p:
        raise ModelError(
            f"model matrix is rank-deficient on this design: rank < p = {p}"
        )
    return m
