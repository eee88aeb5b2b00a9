"""Command-line front end.

Subcommands: ``circuits``, ``robustness``, ``sequence``, ``distribution``,
``bench``, ``model-matrix``.  Designs come from CSV files or the builtin
names ``pb12``, ``oa27`` and ``full`` (the full factorial of the model's
factors).  Exit codes: 0 success, 1 usage error, 2 data or model error.
All randomized behavior is fixed by ``--seed`` (default 0), so identical
invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import comb
from pathlib import Path

from . import __version__
from .bench import (
    DEFAULT_MAX_FRACTIONS,
    DEFAULT_MAX_SUBSETS,
    bench_report,
    distribution,
    write_report,
)
from .circuits import enumerate_circuits
from .designs import (
    Design,
    full_factorial,
    load_design_csv,
    load_model_json,
    model_matrix,
    orthogonal_array_3_4,
    plackett_burman_12,
    save_design_csv,
)
from .errors import CircuitDesignError
from .linalg import Rational
from .removal import TRACE_EXACT_CAP, TRACE_SAMPLE_SIZE, nested_sequence
from .robustness import EXACT_ENUMERATION_CAP, Fraction, robustness_exact, robustness_sampled

ENV_PREFIX = "CIRCUITDESIGN_"


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise CircuitDesignError(f"environment variable {ENV_PREFIX + name} must be an integer") from None


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit2(f"{self.prog}: error: {message}")


class SystemExit2(Exception):
    """Usage error carrying its message; turned into exit code 1 by main()."""


def _add_common(sub, model_required=True):
    sub.add_argument("--design", required=True,
                     help="design CSV path, or builtin: pb12, oa27, full")
    sub.add_argument("--model", required=model_required, help="model JSON path")
    sub.add_argument("--threads", type=int, default=_env_int("THREADS", os.cpu_count() or 1),
                     help="worker processes for circuit enumeration")


def _build_parser() -> _Parser:
    top = _Parser(prog="circuitdesign", description=__doc__)
    top.add_argument("--version", action="version", version=f"circuitdesign {__version__}")
    subs = top.add_subparsers(dest="command")

    c = subs.add_parser("circuits", parents=[], help="enumerate the circuit basis")
    _add_common(c)
    c.add_argument("--reduced", action="store_true", help="only supports of size at most p")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--out", help="output path (default stdout)")

    r = subs.add_parser("robustness", help="robustness of a design or run subset")
    _add_common(r)
    r.add_argument("--runs", help="file with one run label (or 0-based index) per line")
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="force exact enumeration")
    mode.add_argument("--sample", type=int, metavar="N", help="sample N subsets without replacement")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--exact-cap", type=int, default=_env_int("EXACT_CAP", EXACT_ENUMERATION_CAP))

    s = subs.add_parser("sequence", help="greedy nested removal down to a target size")
    _add_common(s)
    s.add_argument("--target", type=int, required=True, help="final fraction size (at least p)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="trace JSON path (default stdout)")
    s.add_argument("--runorder", help="also write the reversed sequence as a design CSV")
    s.add_argument("--exact-cap", type=int, default=_env_int("TRACE_EXACT_CAP", TRACE_EXACT_CAP))
    s.add_argument("--trace-subsets", type=int, default=_env_int("TRACE_SUBSETS", TRACE_SAMPLE_SIZE),
                   help="sampled subsets per step beyond the exact cap")

    d = subs.add_parser("distribution", help="robustness distribution for one k")
    _add_common(d)
    d.add_argument("--k", type=int, required=True, help="number of removed runs")
    d.add_argument("--max-fractions", type=int, default=_env_int("MAX_FRACTIONS", DEFAULT_MAX_FRACTIONS))
    d.add_argument("--max-subsets", type=int, default=_env_int("MAX_SUBSETS", DEFAULT_MAX_SUBSETS))
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", help="CSV path, one robustness value per line (default stdout)")

    b = subs.add_parser("bench", help="full report: sequence plus distribution for every k")
    _add_common(b)
    b.add_argument("--target", type=int, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out-dir", required=True, help="directory for table.csv and dist_k*.csv")
    b.add_argument("--max-fractions", type=int, default=_env_int("MAX_FRACTIONS", DEFAULT_MAX_FRACTIONS))
    b.add_argument("--max-subsets", type=int, default=_env_int("MAX_SUBSETS", DEFAULT_MAX_SUBSETS))
    b.add_argument("--exact-cap", type=int, default=_env_int("TRACE_EXACT_CAP", TRACE_EXACT_CAP))
    b.add_argument("--trace-subsets", type=int, default=_env_int("TRACE_SUBSETS", TRACE_SAMPLE_SIZE))

    m = subs.add_parser("model-matrix", help="print the integer model matrix")
    _add_common(m)
    m.add_argument("--format", choices=("text", "csv", "json"), default="text")
    m.add_argument("--out", help="output path (default stdout)")
    m.add_argument("--emit-design", help="also write the resolved design as CSV")
    return top


def _load_design(source: str, model) -> Design:
    name = source.lower()
    if name == "pb12":
        return plackett_burman_12()
    if name == "oa27":
        return orthogonal_array_3_4()
    if name == "full":
        if model is None:
            raise CircuitDesignError("builtin design 'full' needs --model")
        return full_factorial(model.factors)
    path = Path(source)
    if not path.exists():
        raise CircuitDesignError(f"design file not found: {path}")
    return load_design_csv(path)


def _load_model(path_str):
    if path_str is None:
        return None
    path = Path(path_str)
    if not path.exists():
        raise CircuitDesignError(f"model file not found: {path}")
    return load_model_json(path)


def _write_out(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _level_json(v):
    if isinstance(v, Rational) and v.denominator != 1:
        return f"{v.numerator}/{v.denominator}"
    return int(v)


def _parse_runs_file(path_str: str, design: Design) -> list[int]:
    path = Path(path_str)
    if not path.exists():
        raise CircuitDesignError(f"runs file not found: {path}")
    label_to_idx = {lab: i for i, lab in enumerate(design.labels)}
    out = []
    for line in path.read_text().splitlines():
        t = line.strip()
        if not t:
            continue
        if t in label_to_idx:
            out.append(label_to_idx[t])
        else:
            try:
                idx = int(t)
            except ValueError:
                raise CircuitDesignError(f"{path}: unknown run {t!r}") from None
            if not 0 <= idx < design.n:
                raise CircuitDesignError(f"{path}: run index {idx} out of range")
            out.append(idx)
    return out


def _cmd_circuits(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    m = model_matrix(design, model)
    basis = enumerate_circuits(m, reduced=args.reduced, workers=args.threads)
    if args.format == "json":
        _write_out(basis.to_json() + "\n", args.out)
    else:
        _write_out(basis.to_text() + "\n", args.out)
    return 0


def _cmd_robustness(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    frac = Fraction.of(design, model)
    basis = enumerate_circuits(frac.base_matrix, reduced=True, workers=args.threads)
    if args.runs:
        frac = frac.sub(_parse_runs_file(args.runs, design))
    if args.sample is not None:
        rv = robustness_sampled(frac, basis, args.sample, seed=args.seed)
    else:
        cap = args.exact_cap
        if args.exact:
            cap = max(cap, comb(frac.n, frac.p))
        rv = robustness_exact(frac, basis, cap=cap)
    print(f"robustness = {rv.ratio_str()} = {rv.decimal()}")
    print(f"saturated  = {rv.saturated_count} of {rv.total_count} ({rv.method})")
    return 0


def _trace_json(trace, design: Design) -> str:
    steps = []
    for s in trace.steps:
        steps.append({
            "k": s.k,
            "removed_run_label": s.removed_label,
            "removed_run_levels": [_level_json(v) for v in s.removed_levels],
            "tie_set": [design.labels[r] for r in s.tie_set],
            "surviving_circuits": s.surviving_circuits,
            "robustness_exact": s.robustness.ratio_str(),
            "robustness_decimal": s.robustness.decimal(),
        })
    return json.dumps(steps, indent=2)


def _cmd_sequence(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    trace = nested_sequence(
        design, model, args.target, seed=args.seed,
        exact_cap=args.exact_cap, sample_size=args.trace_subsets, workers=args.threads,
    )
    _write_out(_trace_json(trace, design) + "\n", args.out)
    if args.runorder:
        order = trace.run_order()
        ordered = Design(
            factor_names=design.factor_names,
            runs=tuple(design.runs[i] for i in order),
            labels=tuple(design.labels[i] for i in order),
        )
        save_design_csv(ordered, args.runorder)
    return 0


def _cmd_distribution(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    dist = distribution(
        design, model, args.k,
        max_fractions=args.max_fractions, max_subsets=args.max_subsets,
        seed=args.seed, workers=args.threads,
    )
    lines = [f"{float(v):.10g}" for v in dist.samples]
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_bench(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    report = bench_report(
        design, model, args.target, seed=args.seed,
        max_fractions=args.max_fractions, max_subsets=args.max_subsets,
        trace_exact_cap=args.exact_cap, trace_sample_size=args.trace_subsets,
        workers=args.threads,
    )
    paths = write_report(report, args.out_dir)
    trace_path = Path(args.out_dir) / "trace.json"
    trace_path.write_text(_trace_json(report.trace, design) + "\n")
    for p in paths + [trace_path]:
        print(p)
    return 0


def _cmd_model_matrix(args) -> int:
    model = _load_model(args.model)
    design = _load_design(args.design, model)
    m = model_matrix(design, model)
    if args.emit_design:
        save_design_csv(design, args.emit_design)
    if args.format == "json":
        text = json.dumps({"p": m.rows, "n": m.cols, "rows": m.entries}, indent=2) + "\n"
    elif args.format == "csv":
        text = "\n".join(",".join(str(x) for x in row) for row in m.entries) + "\n"
    else:
        text = str(m) + "\n"
    _write_out(text, args.out)
    return 0


_COMMANDS = {
    "circuits": _cmd_circuits,
    "robustness": _cmd_robustness,
    "sequence": _cmd_sequence,
    "distribution": _cmd_distribution,
    "bench": _cmd_bench,
    "model-matrix": _cmd_model_matrix,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except SystemExit2 as e:
        print(e, file=sys.stderr)
        return 1
    except (CircuitDesignError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
