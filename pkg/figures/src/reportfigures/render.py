"""Render the robustness-distribution chart from a bench report directory.

The report directory holds ``table.csv`` with columns ``k,p75,p90,p95,r_star``
and one ``dist_k<K>.csv`` per k (one robustness value per line).  The chart
shows, for each k on the x axis, the distribution of robustness as bubbles
scaled by frequency, with the greedy algorithm's value r_star overlaid as a
horizontal tick.  Output is written twice, as a raster PNG and a vector SVG,
and is byte-stable across re-runs of the same inputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "reportfigures"

import matplotlib.pyplot as plt


class FigureInputError(Exception):
    """A report file is missing, empty, or malformed."""


def _parse_float(text: str, path: Path, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise FigureInputError(f"{path}:{lineno}: not a number: {text!r}") from None


def _load_table(report_dir: Path) -> list[dict]:
    path = report_dir / "table.csv"
    if not path.exists():
        raise FigureInputError(f"missing file: {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"k", "p75", "p90", "p95", "r_star"}
        if reader.fieldnames is None or not expected <= set(reader.fieldnames):
            raise FigureInputError(f"{path}: header must contain {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                k = int(row["k"])
            except (TypeError, ValueError):
                raise FigureInputError(f"{path}:{lineno}: bad k value {row.get('k')!r}") from None
            rows.append({
                "k": k,
                "p75": _parse_float(row["p75"], path, lineno),
                "p90": _parse_float(row["p90"], path, lineno),
                "p95": _parse_float(row["p95"], path, lineno),
                "r_star": _parse_float(row["r_star"], path, lineno),
            })
    if not rows:
        raise FigureInputError(f"{path}: no rows")
    return rows


def _load_distribution(report_dir: Path, k: int) -> list[float]:
    path = report_dir / f"dist_k{k}.csv"
    if not path.exists():
        raise FigureInputError(f"missing file: {path}")
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            values.append(_parse_float(text, path, lineno))
    if not values:
        raise FigureInputError(f"{path}: empty distribution")
    return values


def load_report(report_dir) -> tuple[list[dict], dict[int, list[float]]]:
    """Table rows and the matching distribution per k; every k needs its file."""
    report = Path(report_dir)
    if not report.is_dir():
        raise FigureInputError(f"missing report directory: {report}")
    table = _load_table(report)
    dists = {row["k"]: _load_distribution(report, row["k"]) for row in table}
    return table, dists


def render(report_dir, out_image) -> dict:
    """Draw the chart and write raster plus vector files.

    Returns a summary with the x positions, marker count, and output paths.
    """
    table, dists = load_report(report_dir)
    ks = [row["k"] for row in table]

    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=150)
    max_count = max(max(Counter(v).values()) for v in dists.values())
    for k in ks:
        counts = Counter(dists[k])
        for value in sorted(counts):
            share = counts[value] / max_count
            ax.scatter([k], [value], s=12 + 340 * share, color="#4878a8",
                       alpha=0.55, edgecolors="none", zorder=2)
    marker_count = 0
    for row in table:
        ax.hlines(row["r_star"], row["k"] - 0.33, row["k"] + 0.33,
                  color="#c23b22", linewidth=1.8, zorder=3)
        marker_count += 1
    ax.set_xlabel("number of removed runs k")
    ax.set_ylabel("robustness")
    ax.set_xticks(ks)
    ax.set_ylim(-0.04, 1.06)
    ax.grid(True, axis="y", linewidth=0.4, alpha=0.4, zorder=1)
    fig.tight_layout()

    out_png = Path(out_image)
    out_png.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_png, format="png")
    out_svg = out_png.with_suffix(".svg")
    fig.savefig(out_svg, format="svg", metadata={"Date": None})
    plt.close(fig)
    return {
        "k_values": ks,
        "r_star_markers": marker_count,
        "raster": out_png,
        "vector": out_svg,
    }


def entry() -> None:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render the robustness distribution chart from a bench report.",
    )
    parser.add_argument("report_dir", help="directory with table.csv and dist_k*.csv")
    parser.add_argument("out_image", help="output PNG path (an SVG is written alongside)")
    args = parser.parse_args()
    try:
        summary = render(args.report_dir, args.out_image)
    except FigureInputError as e:
        print(f"error: {e}", file=sys.stderr)
        raise SystemExit(2)
    print(summary["raster"])
    print(summary["vector"])


if __name__ == "__main__":
    entry()
