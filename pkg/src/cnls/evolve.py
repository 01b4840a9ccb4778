"""Time integration: Strang splitting and 2-stage Gauss-Legendre IRK (order 4).

Both steppers march i u_t + u_xx + N(|u|) u = 0 and its non-autonomous
variant with per-term weights (1 - b t)^(a_k/2 - 2).  The Laplacian enters
through a Fourier symbol: -xi^2 (spectral) or the centered second-order
stencil (fd backend, also circulant hence Fourier-diagonal).

Split step is exactly mass-preserving (the nonlinear substep is a pure phase
rotation, the linear substep a unitary multiplier).  The Gauss stages are
solved by fixed-point sweeps preconditioned with the exact per-mode 2x2
linear solve; divergence of the sweeps triggers step rejection, which the
driver answers by halving dt up to 6 times before flagging blow-up.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .grid import ComplexField, Grid, fd_laplacian_symbol, make_grid
from .nonlinearity import SeriesNonlinearity, eval_N, eval_N_weighted
from .diagnostics import TrajectoryRecord, make_record

__all__ = [
    "SimConfig",
    "BlowupInfo",
    "IntegrationResult",
    "StepRejected",
    "step_split",
    "step_irk4",
    "integrate",
]

# 2-stage Gauss-Legendre tableau (A-stable, symplectic, order 4)
_S3 = math.sqrt(3.0)
GAUSS_A = np.array([[0.25, 0.25 - _S3 / 6.0], [0.25 + _S3 / 6.0, 0.25]])
GAUSS_B = np.array([0.5, 0.5])
GAUSS_C = np.array([0.5 - _S3 / 6.0, 0.5 + _S3 / 6.0])

MAX_HALVINGS = 6


class StepRejected(RuntimeError):
    """Stage equations failed to converge at the current dt."""


@dataclass(frozen=True)
class BlowupInfo:
    time: float
    cause: Literal["linf_threshold", "nonfinite", "step_rejected"]
    linf: float


@dataclass
class IntegrationResult:
    final: ComplexField          # last finite field
    records: list[TrajectoryRecord]
    blowup: Optional[BlowupInfo]
    snapshots: dict[float, ComplexField]

    @property
    def blown_up(self) -> bool:
        return self.blowup is not None


@dataclass(frozen=True)
class SimConfig:
    """Everything one integration needs; validated on construction."""

    L: float
    N: int
    dt: float
    t_end: float
    series: SeriesNonlinearity
    stepper: Literal["irk4", "splitstep"] = "irk4"
    backend: Literal["spectral", "fd"] = "spectral"
    nonautonomous_b: Optional[float] = None
    diagnostics_stride: int = 10
    blowup_threshold: float = 50.0
    weight_n: Optional[float] = None
    snapshot_times: tuple[float, ...] = ()
    stage_tol: float = 1e-13

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("need dt > 0 and t_end > 0")
        if self.stepper not in ("irk4", "splitstep"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.backend not in ("spectral", "fd"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.diagnostics_stride < 1:
            raise ValueError("diagnostics_stride must be >= 1")
        b = self.nonautonomous_b
        if b is not None and b > 0 and self.t_end > (1.0 / b) * (1.0 + 1e-12):
            raise ValueError(
                f"non-autonomous run with b={b} must stop by t = 1/b = {1.0/b}")

    @property
    def t_end_effective(self) -> float:
        """The weights are singular at t = 1/b; stop just short of it."""
        b = self.nonautonomous_b
        if b is not None and b > 0:
            return min(self.t_end, (1.0 - 1e-6) / b)
        return self.t_end

    def make_grid(self) -> Grid:
        return make_grid(self.L, self.N)


def _lap_symbol(grid: Grid, backend: str) -> np.ndarray:
    return fd_laplacian_symbol(grid) if backend == "fd" else -grid.xi_fft**2


def _nl_values(series: SeriesNonlinearity, absu: np.ndarray,
               b: Optional[float], t: float) -> np.ndarray:
    if b is None:
        return eval_N(series, absu)
    return eval_N_weighted(series, absu, b, t)


class _SplitStepper:
    def __init__(self, grid: Grid, series: SeriesNonlinearity,
                 backend: str = "spectral", b: Optional[float] = None):
        self.grid = grid
        self.series = series
        self.b = b
        self.lap = _lap_symbol(grid, backend)
        self._half: dict[float, np.ndarray] = {}
        self._target_mass: float | None = None

    def _half_multiplier(self, dt: float) -> np.ndarray:
        mult = self._half.get(dt)
        if mult is None:
            mult = np.exp(0.5j * dt * self.lap)
            self._half = {dt: mult}  # keep only the active dt
        return mult

    def step(self, u: np.ndarray, dt: float, t_now: float) -> np.ndarray:
        half = self._half_multiplier(dt)
        if self._target_mass is None:
            self._target_mass = float(np.sum(np.abs(u) ** 2))
        v = np.fft.ifft(half * np.fft.fft(u))
        with np.errstate(over="ignore", invalid="ignore"):
            w = _nl_values(self.series, np.abs(v), self.b, t_now + 0.5 * dt)
            v = v * np.exp(1j * dt * w)
        v = np.fft.ifft(half * np.fft.fft(v))
        # the step is exactly mass-preserving in exact arithmetic (the phase
        # has unit modulus, the linear flow is unitary); project onto the
        # run's mass shell so coherent FFT round-off cannot accumulate
        m_after = float(np.sum(np.abs(v) ** 2))
        if m_after > 0 and math.isfinite(m_after) and math.isfinite(self._target_mass):
            v *= math.sqrt(self._target_mass / m_after)
        return v


class _IRK4Stepper:
    def __init__(self, grid: Grid, series: SeriesNonlinearity,
                 backend: str = "spectral", b: Optional[float] = None,
                 stage_tol: float = 1e-13):
        self.grid = grid
        self.series = series
        self.b = b
        self.lap = _lap_symbol(grid, backend)
        self.stage_tol = stage_tol
        self._cache_dt: float | None = None
        self._cache: tuple[np.ndarray, ...] | None = None

    def _mode_solver(self, dt: float) -> tuple[np.ndarray, ...]:
        """Inverse of (I - i dt lap A) per Fourier mode, plus stage predictors."""
        if self._cache_dt == dt and self._cache is not None:
            return self._cache
        z = 1j * dt * self.lap
        m11 = 1.0 - z * GAUSS_A[0, 0]
        m12 = -z * GAUSS_A[0, 1]
        m21 = -z * GAUSS_A[1, 0]
        m22 = 1.0 - z * GAUSS_A[1, 1]
        det = m11 * m22 - m12 * m21
        pred1 = np.exp(1j * GAUSS_C[0] * dt * self.lap)
        pred2 = np.exp(1j * GAUSS_C[1] * dt * self.lap)
        self._cache = (m22 / det, -m12 / det, -m21 / det, m11 / det, pred1, pred2)
        self._cache_dt = dt
        return self._cache

    def _nl(self, U: np.ndarray, t: float) -> np.ndarray:
        return 1j * _nl_values(self.series, np.abs(U), self.b, t) * U

    def step(self, u: np.ndarray, dt: float, t_now: float) -> np.ndarray:
        i11, i12, i21, i22, pred1, pred2 = self._mode_solver(dt)
        uh = np.fft.fft(u)
        U1 = np.fft.ifft(pred1 * uh)
        U2 = np.fft.ifft(pred2 * uh)
        t1 = t_now + GAUSS_C[0] * dt
        t2 = t_now + GAUSS_C[1] * dt
        last = math.inf
        stalled = 0
        converged = False
        d = math.inf
        U1h = U2h = None
        for _ in range(50):
            with np.errstate(over="ignore", invalid="ignore"):
                N1h = np.fft.fft(self._nl(U1, t1))
                N2h = np.fft.fft(self._nl(U2, t2))
            r1 = uh + dt * (GAUSS_A[0, 0] * N1h + GAUSS_A[0, 1] * N2h)
            r2 = uh + dt * (GAUSS_A[1, 0] * N1h + GAUSS_A[1, 1] * N2h)
            U1h = i11 * r1 + i12 * r2
            U2h = i21 * r1 + i22 * r2
            U1n = np.fft.ifft(U1h)
            U2n = np.fft.ifft(U2h)
            d = max(float(np.max(np.abs(U1n - U1))), float(np.max(np.abs(U2n - U2))))
            U1, U2 = U1n, U2n
            if not math.isfinite(d):
                raise StepRejected(f"stage iteration produced non-finite values at t={t_now}")
            scale = 1.0 + float(np.max(np.abs(U1)))
            if d <= self.stage_tol * scale:
                converged = True
                break
            if d >= last:
                stalled += 1
                if d > 10.0 * scale:  # running away, no point sweeping on
                    raise StepRejected(f"stage iteration diverging at t={t_now}")
                if stalled >= 3:
                    if d <= 100.0 * self.stage_tol * scale:
                        converged = True  # round-off plateau
                    break
            else:
                stalled = 0
            last = d
        if not converged:
            scale = 1.0 + float(np.max(np.abs(U1)))
            if d > 1e-3 * scale:  # too far gone for Newton to be worth it
                raise StepRejected(f"stage iteration stalled at {d:.3e} at t={t_now}")
            U1, U2 = self._newton_fallback(u, uh, dt, t1, t2, U1, U2)
            U1h, U2h = np.fft.fft(U1), np.fft.fft(U2)
        with np.errstate(over="ignore", invalid="ignore"):
            F1h = 1j * self.lap * U1h + np.fft.fft(self._nl(U1, t1))
            F2h = 1j * self.lap * U2h + np.fft.fft(self._nl(U2, t2))
        return np.fft.ifft(uh + dt * (GAUSS_B[0] * F1h + GAUSS_B[1] * F2h))

    def _newton_fallback(self, u, uh, dt, t1, t2, U1, U2):
        """Newton-Krylov on the stage residual after Picard exhaustion."""
        from scipy.optimize import newton_krylov
        from scipy.optimize._nonlin import NoConvergence

        n = u.size

        def residual(z: np.ndarray) -> np.ndarray:
            W1 = z[:n] + 1j * z[n:2 * n]
            W2 = z[2 * n:3 * n] + 1j * z[3 * n:]
            with np.errstate(over="ignore", invalid="ignore"):
                F1 = np.fft.ifft(1j * self.lap * np.fft.fft(W1)) + self._nl(W1, t1)
                F2 = np.fft.ifft(1j * self.lap * np.fft.fft(W2)) + self._nl(W2, t2)
            R1 = W1 - u - dt * (GAUSS_A[0, 0] * F1 + GAUSS_A[0, 1] * F2)
            R2 = W2 - u - dt * (GAUSS_A[1, 0] * F1 + GAUSS_A[1, 1] * F2)
            return np.concatenate([R1.real, R1.imag, R2.real, R2.imag])

        z0 = np.concatenate([U1.real, U1.imag, U2.real, U2.imag])
        if not np.all(np.isfinite(z0)):
            raise StepRejected("stage iterate lost finiteness before Newton fallback")
        scale = 1.0 + float(np.max(np.abs(z0)))
        try:
            with np.errstate(all="ignore"):
                z = newton_krylov(residual, z0, f_tol=self.stage_tol * 10.0 * scale,
                                  maxiter=40)
        except (NoConvergence, ValueError, np.linalg.LinAlgError) as exc:
            raise StepRejected(f"Newton fallback failed: {exc}") from exc
        if not np.all(np.isfinite(z)):
            raise StepRejected("Newton fallback returned non-finite stages")
        with np.errstate(all="ignore"):
            final_res = float(np.max(np.abs(residual(z))))
        if not math.isfinite(final_res) or final_res > 1e3 * self.stage_tol * scale:
            raise StepRejected(f"Newton fallback residual {final_res:.3e} too large")
        return z[:n] + 1j * z[n:2 * n], z[2 * n:3 * n] + 1j * z[3 * n:]


def _make_stepper(cfg_stepper: str, grid: Grid, series: SeriesNonlinearity,
                  backend: str, b: Optional[float], stage_tol: float):
    if cfg_stepper == "splitstep":
        return _SplitStepper(grid, series, backend, b)
    return _IRK4Stepper(grid, series, backend, b, stage_tol)


def step_split(u: ComplexField, dt: float, series: SeriesNonlinearity,
               t_now: float | None = None, b_opt: float | None = None,
               backend: str = "spectral") -> ComplexField:
    """One Strang step: half linear flow, nonlinear phase rotation, half linear."""
    t0 = u.time if t_now is None else t_now
    st = _SplitStepper(u.grid, series, backend, b_opt)
    return ComplexField(u.grid, st.step(u.values, dt, t0), t0 + dt)


def step_irk4(u: ComplexField, dt: float, series: SeriesNonlinearity,
              t_now: float | None = None, b_opt: float | None = None,
              backend: str = "spectral", stage_tol: float = 1e-13) -> ComplexField:
    """One 2-stage Gauss-Legendre step; raises StepRejected when stages fail."""
    t0 = u.time if t_now is None else t_now
    st = _IRK4Stepper(u.grid, series, backend, b_opt, stage_tol)
    return ComplexField(u.grid, st.step(u.values, dt, t0), t0 + dt)


def _advance_with_halving(stepper, u: np.ndarray, dt: float, t_now: float,
                          depth: int = 0) -> tuple[np.ndarray, bool]:
    """Advance one dt, answering stage rejection with two half steps.

    Returns (new field, whether any halving was needed).
    """
    try:
        return stepper.step(u, dt, t_now), depth > 0
    except StepRejected:
        if depth >= MAX_HALVINGS:
            raise
        half = dt / 2.0
        mid, _ = _advance_with_halving(stepper, u, half, t_now, depth + 1)
        if not np.all(np.isfinite(mid.view(float))):
            raise
        out, _ = _advance_with_halving(stepper, mid, half, t_now + half, depth + 1)
        return out, True


def integrate(config: SimConfig, u0: ComplexField) -> IntegrationResult:
    """March to t_end (or blow-up), recording diagnostics every stride steps.

    Blow-up is flagged on any of: L_inf exceeding the configured multiple of
    its initial value, non-finite samples, or exhaustion of step halvings.
    The reported field is the last finite one; records cover the growth.
    """
    grid = u0.grid
    if (grid.L, grid.N) != (config.L, config.N):
        raise ValueError(
            f"initial field lives on (L={grid.L}, N={grid.N}), config says "
            f"(L={config.L}, N={config.N})")
    if not u0.is_finite():
        raise ValueError("initial field has non-finite samples")

    t_end = config.t_end_effective
    dt = config.dt
    n_full = int(math.floor(t_end / dt + 1e-9))
    t_last = n_full * dt
    tail_dt = t_end - t_last if t_end - t_last > 1e-12 * max(1.0, t_end) else 0.0

    snap_steps: dict[int, float] = {}
    for ts in config.snapshot_times:
        k = int(round(ts / dt))
        if abs(k * dt - ts) > 1e-9 * max(1.0, abs(ts)) or k > n_full:
            raise ValueError(f"snapshot time {ts} is not a step multiple of dt={dt}")
        snap_steps[k] = ts

    stepper = _make_stepper(config.stepper, grid, config.series, config.backend,
                            config.nonautonomous_b, config.stage_tol)

    u = u0.values.astype(complex)
    t0 = u0.time
    linf0 = float(np.max(np.abs(u)))
    threshold = config.blowup_threshold * linf0

    records: list[TrajectoryRecord] = []
    snapshots: dict[float, ComplexField] = {}

    def record(t: float, vals: np.ndarray, blow: bool = False) -> None:
        records.append(make_record(ComplexField(grid, vals, t), t, config.series,
                                   config.weight_n, blow))

    record(t0, u)
    if 0 in snap_steps:
        snapshots[snap_steps[0]] = ComplexField(grid, u.copy(), t0)

    last_finite = u.copy()
    t_last_finite = t0
    blowup: Optional[BlowupInfo] = None

    steps = [(k, dt) for k in range(1, n_full + 1)]
    if tail_dt > 0.0:
        steps.append((n_full + 1, tail_dt))

    halved_streak = 0
    for k, h in steps:
        t_now = t0 + (k - 1) * dt if k <= n_full else t0 + t_last
        try:
            u, halved = _advance_with_halving(stepper, u, h, t_now)
        except StepRejected:
            blowup = BlowupInfo(time=t_now, cause="step_rejected",
                                linf=float(np.max(np.abs(last_finite))))
            break
        halved_streak = halved_streak + 1 if halved else 0
        if halved_streak >= MAX_HALVINGS:
            # persistent rejection: the flow has left the resolvable regime
            blowup = BlowupInfo(time=t_now + h, cause="step_rejected",
                                linf=float(np.max(np.abs(u))))
            break
        t = t_now + h
        linf = float(np.max(np.abs(u)))
        if not math.isfinite(linf) or not np.all(np.isfinite(u.view(float))):
            blowup = BlowupInfo(time=t, cause="nonfinite",
                                linf=float(np.max(np.abs(last_finite))))
            break
        last_finite = u.copy()
        t_last_finite = t
        if linf >= threshold:
            record(t, u, blow=True)
            blowup = BlowupInfo(time=t, cause="linf_threshold", linf=linf)
            break
        if k in snap_steps:
            snapshots[snap_steps[k]] = ComplexField(grid, u.copy(), t)
        if k % config.diagnostics_stride == 0 or k == len(steps):
            record(t, u)

    if blowup is None and records and records[-1].t < t_last_finite - 1e-12:
        record(t_last_finite, last_finite)
    if blowup is not None and not records[-1].blowup_flag:
        # rejection/non-finite paths break before recording; flag the growth
        if records[-1].t < t_last_finite - 1e-12:
            record(t_last_finite, last_finite, blow=True)
        else:
            records[-1] = dataclasses.replace(records[-1], blowup_flag=True)

    return IntegrationResult(
        final=ComplexField(grid, last_finite, t_last_finite),
        records=records,
        blowup=blowup,
        snapshots=snapshots,
    )
