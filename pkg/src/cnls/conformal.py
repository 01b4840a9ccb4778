"""Pseudo-conformal machinery and the global-behavior classifier.

The lens map carries a solution v of the transformed, non-autonomous
equation (finite window [0, 1/b)) to a global solution u of the original
flow:

    u(x, t) = (1 + b t)^(-1/2) e^{i b x^2 / (4 (1 + b t))} v(x/(1+bt), t/(1+bt))

Scattering data are compared against the profile built from v at the window
endpoint; global behavior of recorded trajectories is classified from the
decay indicator (1+t)^(1/2) ||u||_inf.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .grid import ComplexField, free_propagate, l2_norm, resample_scaled
from .nonlinearity import SeriesNonlinearity
from .profiles import quadratic_phase
from .diagnostics import TrajectoryRecord
from .evolve import IntegrationResult, SimConfig, integrate

__all__ = [
    "GlobalVerdict",
    "ClassifyParams",
    "ConformalPair",
    "pseudo_conformal_map",
    "scattering_profile",
    "classify_global",
    "build_conformal_pair",
    "conformal_equivalence_check",
    "EquivalenceReport",
]


class GlobalVerdict(str, Enum):
    SCATTERING = "scattering"
    BLOWUP = "blowup"
    OSCILLATING = "oscillating"
    INCONCLUSIVE = "inconclusive"


def pseudo_conformal_map(v: ComplexField, b: float, t: float) -> ComplexField:
    """Evaluate the lens map at target time t from v at time s = t/(1+bt).

    The rescaled argument x/(1+bt) falls off-grid; band-limited interpolation
    keeps the evaluation spectrally accurate.
    """
    scale = 1.0 + b * t
    if scale <= 0:
        raise ValueError(f"pseudo-conformal map needs 1 + b t > 0, got {scale}")
    s_expected = t / scale
    if abs(v.time - s_expected) > 1e-9 * (1.0 + abs(t)):
        raise ValueError(
            f"v carries time {v.time}, the map at t={t} needs s = t/(1+bt) = {s_expected}")
    if scale == 1.0:
        resampled = v.values  # t = 0: the map reduces to the phase wrapper
    elif scale > 1.0:
        resampled = resample_scaled(v, scale)
    else:  # b < 0, t < 0 would shrink; not used by the experiments
        raise ValueError("map evaluation requires 1 + b t >= 1 on the fixed grid")
    x = v.grid.x
    vals = scale**-0.5 * np.exp(0.25j * b * x**2 / scale) * resampled
    return ComplexField(v.grid, vals, t)


def scattering_profile(v_end: ComplexField, b: float) -> ComplexField:
    """u_plus = e^{i b x^2/4} e^{-i (1/b) d_x^2} v(., 1/b).

    ``v_end`` is the non-autonomous solution at the (truncated) window
    endpoint; both factors are L2 isometries.
    """
    if b <= 0:
        raise ValueError("scattering profile needs b > 0")
    return quadratic_phase(free_propagate(v_end, -1.0 / b), b)


@dataclass(frozen=True)
class ClassifyParams:
    """Thresholds for the finite-horizon global classifier."""

    min_records: int = 20
    slope_tol: float = 1e-3       # running-max slope of the decay indicator
    tail_fraction: float = 0.25   # window for the slope fit
    osc_floor: float = 0.1        # last-window mean linf vs peak, for OSCILLATING
    osc_bound: float = 3.0        # linf never exceeds this multiple of its start


def _tail_slope(ts: np.ndarray, ys: np.ndarray, frac: float) -> float:
    n = max(2, int(len(ts) * frac))
    tt, yy = ts[-n:], ys[-n:]
    a = np.vstack([tt, np.ones_like(tt)]).T
    return float(np.linalg.lstsq(a, yy, rcond=None)[0][0])


def classify_global(records: Sequence[TrajectoryRecord],
                    params: ClassifyParams = ClassifyParams()) -> GlobalVerdict:
    """SCATTERING / BLOWUP / OSCILLATING / INCONCLUSIVE from a trajectory.

    SCATTERING: the running max of (1+t)^(1/2)||u||_inf stays bounded and its
    tail slope is below tolerance.  BLOWUP: the integration flagged it.
    OSCILLATING: ||u||_inf bounded with non-vanishing amplitude.
    """
    if any(r.blowup_flag for r in records):
        return GlobalVerdict.BLOWUP
    if len(records) < params.min_records:
        return GlobalVerdict.INCONCLUSIVE

    ts = np.array([r.t for r in records])
    linf = np.array([r.linf for r in records])
    si = np.array([r.scatter_indicator for r in records])
    run_max = np.maximum.accumulate(si)

    slope = _tail_slope(ts, run_max, params.tail_fraction)
    if slope <= params.slope_tol:
        return GlobalVerdict.SCATTERING

    bounded = np.max(linf) <= params.osc_bound * max(linf[0], 1e-300)
    n_tail = max(2, int(len(ts) * params.tail_fraction))
    alive = float(np.mean(linf[-n_tail:])) >= params.osc_floor * float(np.max(linf))
    if bounded and alive:
        return GlobalVerdict.OSCILLATING
    return GlobalVerdict.INCONCLUSIVE


@dataclass
class ConformalPair:
    """A non-autonomous trajectory plus the mapped reconstructions of u."""

    b: float
    v_result: IntegrationResult
    u_mapped: dict[float, ComplexField] = field(default_factory=dict)


def build_conformal_pair(v0: ComplexField, b: float, series: SeriesNonlinearity,
                         t_list: Sequence[float], dt: float, stepper: str = "splitstep",
                         stage_tol: float = 1e-13) -> ConformalPair:
    """Integrate the transformed equation and map back at the target times.

    The v integration must sample s_k = t_k/(1 + b t_k) exactly, so dt must
    divide every s_k.
    """
    if b <= 0:
        raise ValueError("the transformed window [0, 1/b) needs b > 0")
    s_list = [t / (1.0 + b * t) for t in t_list]
    cfg = SimConfig(
        L=v0.grid.L, N=v0.grid.N, dt=dt, t_end=max(s_list), series=series,
        stepper=stepper, nonautonomous_b=b, snapshot_times=tuple(s_list),
        stage_tol=stage_tol,
    )
    vres = integrate(cfg, v0)
    if vres.blown_up:
        raise RuntimeError(f"transformed branch blew up: {vres.blowup}")
    pair = ConformalPair(b=b, v_result=vres)
    for t, s in zip(t_list, s_list):
        pair.u_mapped[t] = pseudo_conformal_map(vres.snapshots[s], b, t)
    return pair


@dataclass(frozen=True)
class EquivalenceReport:
    b: float
    t_list: tuple[float, ...]
    deviations_l2: tuple[float, ...]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations_l2)


def conformal_equivalence_check(v0: ComplexField, b: float, series: SeriesNonlinearity,
                                t_list: Sequence[float], dt: float,
                                u_stepper: str = "irk4",
                                v_stepper: str = "splitstep") -> EquivalenceReport:
    """Evolve u directly from e^{ibx^2/4} v0 and compare with the mapped v.

    Every alpha_k must exceed 2 (the transformed weights are integrable only
    then).  dt must divide each t_k and each s_k; returns L2 deviations.
    """
    if series.kind == "finite_sum" and series.terms:
        k, _, a = next(iter(series.indexed_terms()))
        if a <= 2:  # terms are sorted ascending
            raise ValueError(f"equivalence check needs alpha > 2, term {k} has alpha={a}")
    elif series.kind != "finite_sum":
        _, a = next(iter(series.iter_terms(series.tail_cut + 1)))
        if a <= 2:
            raise ValueError("equivalence check needs every power above 2; use a tail family")

    t_list = sorted(t_list)
    pair = build_conformal_pair(v0, b, series, t_list, dt, v_stepper)

    u0 = quadratic_phase(v0, b)
    cfg_u = SimConfig(
        L=v0.grid.L, N=v0.grid.N, dt=dt, t_end=max(t_list), series=series,
        stepper=u_stepper, snapshot_times=tuple(t_list),
    )
    ures = integrate(cfg_u, u0)
    if ures.blown_up:
        raise RuntimeError(f"direct branch blew up: {ures.blowup}")

    devs = []
    for t in t_list:
        diff = ures.snapshots[t].values - pair.u_mapped[t].values
        devs.append(l2_norm(ComplexField(v0.grid, diff)))
    return EquivalenceReport(b=b, t_list=tuple(t_list), deviations_l2=tuple(devs))
