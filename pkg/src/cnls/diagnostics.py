"""Conserved quantities, norms, and trajectory persistence.

The flow i u_t + u_xx + N(|u|) u = 0 conserves the mass integral |u|^2 and,
for real coefficients, the energy 1/2 int |u_x|^2 - int G(|u|) with G the
potential density from the nonlinearity module.  Records are serialized to
trajectory.csv / summary.json with 17 significant digits so conservation
plots remain faithful to round-off.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import ComplexField, derivative, l2_norm
from .nonlinearity import SeriesNonlinearity, potential_density

__all__ = [
    "EnergyBreakdown",
    "TrajectoryRecord",
    "mass",
    "energy",
    "hs_norm",
    "weighted_linf",
    "scatter_indicator",
    "make_record",
    "persist",
    "write_trajectory",
    "load_trajectory",
    "write_summary",
    "write_field_csv",
    "load_field_csv",
]

TRAJECTORY_COLUMNS = (
    "t", "mass", "energy_total", "energy_kinetic", "energy_potential",
    "linf", "weighted_linf", "scatter_indicator", "blowup_flag",
)


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    total: float
    tracked: bool

    @staticmethod
    def untracked() -> "EnergyBreakdown":
        return EnergyBreakdown(math.nan, math.nan, math.nan, False)


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    mass: float
    energy: EnergyBreakdown
    linf: float
    weighted_linf: float  # nan when no weight power configured
    scatter_indicator: float
    blowup_flag: bool = False


def mass(u: ComplexField) -> float:
    """Quadrature of |u|^2 over the grid."""
    return float(u.grid.dx * np.sum(np.abs(u.values) ** 2))


def energy(u: ComplexField, series: SeriesNonlinearity) -> EnergyBreakdown:
    """Hamiltonian split: kinetic 1/2 int |u_x|^2, potential int G(|u|).

    Complex coefficients have no conserved Hamiltonian; the breakdown is
    then marked untracked.
    """
    if not series.is_real:
        return EnergyBreakdown.untracked()
    kin = 0.5 * l2_norm(derivative(u, 1)) ** 2
    pot = float(u.grid.dx * np.sum(potential_density(series, np.abs(u.values))))
    return EnergyBreakdown(kinetic=kin, potential=pot, total=kin - pot, tracked=True)


def hs_norm(u: ComplexField, s: float) -> float:
    """Sobolev norm of order s via the <xi>^s multiplier (frequency side)."""
    uh = np.fft.fft(u.values)
    return float(np.sqrt(u.grid.dx / u.grid.N *
                         np.sum((1.0 + u.grid.xi_fft**2) ** s * np.abs(uh) ** 2)))


def weighted_linf(u: ComplexField, n: float) -> float:
    """sup of <x>^n |u| over the grid."""
    return float(np.max(u.grid.weight(n) * np.abs(u.values)))


def scatter_indicator(u: ComplexField, t: float) -> float:
    """(1+t)^(1/2) ||u||_inf, the finite-horizon decay indicator."""
    return float(math.sqrt(1.0 + t) * np.max(np.abs(u.values)))


def make_record(u: ComplexField, t: float, series: SeriesNonlinearity,
                weight_n: float | None = None, blowup: bool = False) -> TrajectoryRecord:
    linf = float(np.max(np.abs(u.values)))
    return TrajectoryRecord(
        t=t,
        mass=mass(u),
        energy=energy(u, series),
        linf=linf,
        weighted_linf=weighted_linf(u, weight_n) if weight_n is not None else math.nan,
        scatter_indicator=math.sqrt(1.0 + t) * linf,
        blowup_flag=blowup,
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _atomic_write(path: str, write_fn) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trajectory(records: Sequence[TrajectoryRecord], path: str) -> None:
    """Write trajectory.csv atomically (write-temp-rename)."""

    def _write(fh):
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for r in records:
            w.writerow([
                _fmt(r.t), _fmt(r.mass), _fmt(r.energy.total), _fmt(r.energy.kinetic),
                _fmt(r.energy.potential), _fmt(r.linf), _fmt(r.weighted_linf),
                _fmt(r.scatter_indicator), int(r.blowup_flag),
            ])

    try:
        _atomic_write(path, _write)
    except OSError as exc:
        raise OSError(f"failed writing trajectory to {path}: {exc}") from exc


def load_trajectory(path: str) -> list[TrajectoryRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRAJECTORY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            eb = EnergyBreakdown(
                kinetic=float(row["energy_kinetic"]),
                potential=float(row["energy_potential"]),
                total=float(row["energy_total"]),
                tracked=not math.isnan(float(row["energy_total"])),
            )
            records.append(TrajectoryRecord(
                t=float(row["t"]), mass=float(row["mass"]), energy=eb,
                linf=float(row["linf"]), weighted_linf=float(row["weighted_linf"]),
                scatter_indicator=float(row["scatter_indicator"]),
                blowup_flag=bool(int(row["blowup_flag"])),
            ))
    return records


def write_summary(summary: dict, path: str) -> None:
    try:
        _atomic_write(path, lambda fh: json.dump(summary, fh, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"failed writing summary to {path}: {exc}") from exc


def persist(records: Sequence[TrajectoryRecord], summary: dict, outdir: str) -> None:
    """Write trajectory.csv and summary.json under outdir, atomically."""
    write_trajectory(records, os.path.join(outdir, "trajectory.csv"))
    write_summary(summary, os.path.join(outdir, "summary.json"))


def write_field_csv(u: ComplexField, path: str) -> None:
    """Field snapshot: columns x, Re u, Im u, |u| with one header row."""

    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["x", "re_u", "im_u", "abs_u"])
        for xj, vj in zip(u.grid.x, u.values):
            w.writerow([_fmt(xj), _fmt(vj.real), _fmt(vj.imag), _fmt(abs(vj))])

    _atomic_write(path, _write)


def load_field_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a field snapshot back as (x, complex values)."""
    xs, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"x", "re_u", "im_u"}
        missing = need - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            xs.append(float(row["x"]))
            vals.append(complex(float(row["re_u"]), float(row["im_u"])))
    return np.asarray(xs), np.asarray(vals)
