#!/usr/bin/env python3
"""Regenerate figure panels from CLI output files.

Reads only the documented CSV/JSON formats (trajectory.csv, snap_*.csv,
gs_comparison.csv, verdicts.csv) and renders deterministic PNGs: profile
snapshots, L-infinity histories, conservation-error curves on a log axis,
ground-state comparison/difference panels, and verdict maps over (A, b).

Usage: python plots/render.py --fig <id> --in <dir> --out <file.png>
"""

from __future__ import annotations

import argparse
import csv
import glob
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURE_IDS = ("profile", "linf", "conservation", "groundstate", "verdicts",
              "fig1", "fig5")

TRAJECTORY_COLUMNS = {
    "t", "mass", "energy_total", "energy_kinetic", "energy_potential",
    "linf", "weighted_linf", "scatter_indicator", "blowup_flag",
}


class SchemaError(ValueError):
    pass


def read_csv_columns(path: str, required: set[str]) -> dict[str, list[float]]:
    if not os.path.exists(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        have = set(reader.fieldnames or ())
        missing = required - have
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        cols: dict[str, list[float]] = {name: [] for name in have}
        for row in reader:
            for name in have:
                try:
                    cols[name].append(float(row[name]))
                except ValueError:
                    cols[name].append(math.nan)
    return cols


def _finish(fig, out: str) -> None:
    fig.savefig(out, dpi=130)
    plt.close(fig)
    print(f"wrote {out}")


def render_profile(indir: str, out: str) -> None:
    snaps = sorted(glob.glob(os.path.join(indir, "snap_*.csv")))
    if not snaps:
        raise SchemaError(f"no snap_*.csv files under {indir}")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in snaps:
        cols = read_csv_columns(path, {"x", "abs_u"})
        label = os.path.basename(path)[5:-4]
        ax.plot(cols["x"], cols["abs_u"], lw=1.0, label=f"t={label}")
    ax.set_xlabel("x")
    ax.set_ylabel("|u|")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, out)


def render_linf(indir: str, out: str) -> None:
    cols = read_csv_columns(os.path.join(indir, "trajectory.csv"), TRAJECTORY_COLUMNS)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(cols["t"], cols["linf"], lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|u\|_\infty$")
    _finish(fig, out)


def _relative_drift(ts, values):
    v0 = values[0]
    scale = abs(v0) if v0 else 1.0
    return [abs(v - v0) / scale for v in values]


def render_conservation(indir: str, out: str) -> None:
    cols = read_csv_columns(os.path.join(indir, "trajectory.csv"), TRAJECTORY_COLUMNS)
    ts = cols["t"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    floor = 1e-17
    ax.semilogy(ts, [max(v, floor) for v in _relative_drift(ts, cols["mass"])],
                lw=1.0, label="mass drift")
    if not math.isnan(cols["energy_total"][0]):
        ax.semilogy(ts, [max(v, floor) for v in _relative_drift(ts, cols["energy_total"])],
                    lw=1.0, label="energy drift")
    ax.set_xlabel("t")
    ax.set_ylabel("relative drift")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, out)


def render_fig1(indir: str, out: str) -> None:
    """L-infinity history next to the conservation-error panel."""
    cols = read_csv_columns(os.path.join(indir, "trajectory.csv"), TRAJECTORY_COLUMNS)
    ts = cols["t"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.plot(ts, cols["linf"], lw=1.0)
    ax1.set_xlabel("t")
    ax1.set_ylabel(r"$\|u\|_\infty$")
    floor = 1e-17
    ax2.semilogy(ts, [max(v, floor) for v in _relative_drift(ts, cols["mass"])],
                 lw=1.0, label="mass drift")
    if not math.isnan(cols["energy_total"][0]):
        ax2.semilogy(ts, [max(v, floor) for v in _relative_drift(ts, cols["energy_total"])],
                     lw=1.0, label="energy drift")
    ax2.set_xlabel("t")
    ax2.set_ylabel("relative drift")
    ax2.legend(loc="best", fontsize=8)
    _finish(fig, out)


def render_groundstate(indir: str, out: str) -> None:
    """Numerical vs explicit profile with the pointwise difference panel."""
    cols = read_csv_columns(os.path.join(indir, "gs_comparison.csv"),
                            {"x", "q_num", "q_exact", "diff"})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.plot(cols["x"], cols["q_exact"], lw=1.4, label="explicit")
    ax1.plot(cols["x"], cols["q_num"], lw=0.8, ls="--", label="computed")
    ax1.set_xlabel("x")
    ax1.set_ylabel("Q")
    ax1.legend(loc="best", fontsize=8)
    floor = 1e-18
    ax2.semilogy(cols["x"], [max(v, floor) for v in cols["diff"]], lw=0.8)
    ax2.set_xlabel("x")
    ax2.set_ylabel("|computed - explicit|")
    _finish(fig, out)


def render_verdicts(indir: str, out: str) -> None:
    path = os.path.join(indir, "verdicts.csv")
    if not os.path.exists(path):
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"b", "A", "verdict", "t_blowup_or_horizon", "max_scatter_indicator"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    markers = {"scattering": ("o", "tab:blue"), "blowup": ("x", "tab:red"),
               "oscillating": ("s", "tab:green"), "inconclusive": ("d", "tab:gray")}
    seen = set()
    for row in rows:
        verdict = row["verdict"]
        mk, color = markers.get(verdict, ("d", "tab:gray"))
        label = verdict if verdict not in seen else None
        seen.add(verdict)
        try:
            b, a = float(row["b"]), float(row["A"])
        except ValueError:
            continue
        ax.scatter([b], [a], marker=mk, c=color, label=label)
    ax.set_xlabel("b")
    ax.set_ylabel("A")
    if not rows:
        print("warning: empty verdict sweep, rendering a legend-only plot")
    handles, labels = ax.get_legend_handles_labels()
    if handles:
        ax.legend(loc="best", fontsize=8)
    _finish(fig, out)


RENDERERS = {
    "profile": render_profile,
    "linf": render_linf,
    "conservation": render_conservation,
    "fig1": render_fig1,
    "groundstate": render_groundstate,
    "fig5": render_groundstate,
    "verdicts": render_verdicts,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fig", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--in", dest="indir", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        RENDERERS[args.fig](args.indir, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
