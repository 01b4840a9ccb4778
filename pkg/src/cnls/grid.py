"""Uniform periodic grid, Fourier multipliers, and the free propagator.

All spatial operators in this package are realized as Fourier multipliers on
a periodic grid [-L, L) with N nodes.  The dual frequencies are
xi_m = (pi/L) m for m in {-N/2, ..., N/2-1}; internally they are kept in
FFT-natural order, the public ``Grid.xi`` attribute exposes them sorted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "ComplexField",
    "make_grid",
    "apply_multiplier",
    "derivative",
    "bessel",
    "riesz",
    "free_propagate",
    "fd_laplacian_symbol",
    "l2_norm",
    "linf_norm",
    "inner",
    "resample_scaled",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L) together with its Fourier dual.

    Attributes
    ----------
    L : float
        Half-width of the domain.
    N : int
        Number of nodes, a power of two.
    dx : float
        Node spacing 2L/N.
    x : ndarray
        Nodes x_j = -L + j dx, strictly increasing.
    xi : ndarray
        Dual frequencies (pi/L) m, m = -N/2 .. N/2-1, sorted ascending.
    xi_fft : ndarray
        Same frequencies in FFT-natural order (used by the multiplier ops).
    """

    L: float
    N: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    xi: np.ndarray = field(init=False, repr=False)
    xi_fft: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError(f"domain half-width must be positive, got L={self.L}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"node count must be a power of two >= 8, got N={self.N}")
        dx = 2.0 * self.L / self.N
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", -self.L + dx * np.arange(self.N))
        xi_fft = 2.0 * np.pi * np.fft.fftfreq(self.N, d=dx)
        object.__setattr__(self, "xi_fft", xi_fft)
        object.__setattr__(self, "xi", np.sort(xi_fft))
        self.x.setflags(write=False)
        self.xi.setflags(write=False)
        self.xi_fft.setflags(write=False)

    def weight(self, n: float) -> np.ndarray:
        """Pointwise weight <x>^n = (1+x^2)^(n/2)."""
        return (1.0 + self.x**2) ** (n / 2.0)


@dataclass
class ComplexField:
    """Complex samples of u(., t) on a Grid."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.N,):
            raise ValueError(
                f"field has {self.values.shape} values, grid expects ({self.grid.N},)"
            )

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy(), self.time)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values.view(float))))


def make_grid(L: float, N: int) -> Grid:
    """Build the periodic grid with spacing dx = 2L/N; rejects bad configs."""
    return Grid(L=float(L), N=int(N))


def apply_multiplier(f: ComplexField, m: Callable[[np.ndarray], np.ndarray]) -> ComplexField:
    """Apply the Fourier multiplier with symbol ``m``: ifft(m(xi) * fft(f)).

    ``m`` is called with the frequency array (FFT-natural order) and must
    return the symbol values pointwise; the result keeps the field's time.
    """
    sym = m(f.grid.xi_fft)
    out = np.fft.ifft(sym * np.fft.fft(f.values))
    return ComplexField(f.grid, out, f.time)


def derivative(f: ComplexField, k: int = 1) -> ComplexField:
    """Spectral derivative d^k/dx^k via the symbol (i xi)^k."""
    return apply_multiplier(f, lambda xi: (1j * xi) ** k)


def bessel(f: ComplexField, s: float) -> ComplexField:
    """J^s, the multiplier with symbol <xi>^s = (1+xi^2)^(s/2)."""
    return apply_multiplier(f, lambda xi: (1.0 + xi**2) ** (s / 2.0))


def riesz(f: ComplexField, s: float) -> ComplexField:
    """D^s, the multiplier with symbol |xi|^s."""
    return apply_multiplier(f, lambda xi: np.abs(xi) ** s)


def free_propagate(f: ComplexField, t: float) -> ComplexField:
    """Free Schroedinger evolution e^{it d_x^2} f, symbol e^{-it xi^2}.

    The returned field's time stamp advances by t.
    """
    out = apply_multiplier(f, lambda xi: np.exp(-1j * t * xi**2))
    out.time = f.time + t
    return out


def fd_laplacian_symbol(grid: Grid) -> np.ndarray:
    """Symbol of the second-order centered FD Laplacian, -4 sin^2(xi dx/2)/dx^2.

    The periodic three-point stencil is circulant, hence diagonal in the same
    Fourier basis as the spectral Laplacian (symbol -xi^2); both backends plug
    into the integrators through this array.
    """
    return -4.0 * np.sin(grid.xi_fft * grid.dx / 2.0) ** 2 / grid.dx**2


def l2_norm(f: ComplexField) -> float:
    """Grid L2 norm, rectangle rule (spectrally accurate for periodic data)."""
    return float(np.sqrt(f.grid.dx * np.sum(np.abs(f.values) ** 2)))


def linf_norm(f: ComplexField) -> float:
    return float(np.max(np.abs(f.values)))


def inner(f: ComplexField, g: ComplexField) -> complex:
    """L2 inner product <f, g> = dx * sum(conj(f) g)."""
    return complex(f.grid.dx * np.sum(np.conj(f.values) * g.values))


def resample_scaled(f: ComplexField, factor: float) -> np.ndarray:
    """Band-limited samples of f at the dilated points x_j / factor.

    Evaluates the trigonometric interpolant of ``f`` at y_j = x_j/factor,
    which for |factor| >= 1 stay inside the domain.  The target points form
    an arithmetic progression, so the sums are chirp-z transforms.
    """
    if abs(factor) < 1.0:
        raise ValueError("resample_scaled expects |factor| >= 1 (points leave the domain)")
    from scipy.signal import czt

    g = f.grid
    # interpolant u(y) = sum_m c_m e^{i xi_m y}; since x_0 = -L the DFT
    # coefficients carry an extra e^{i xi_m L} = (-1)^m
    m_int = np.rint(np.fft.fftfreq(g.N) * g.N).astype(int)
    fh = np.fft.fft(f.values) / g.N * (-1.0) ** (m_int & 1)
    # v(y_j) = sum_m fh_m e^{i xi_m y_j},  y_j = (-L + j dx)/factor.
    # Split the FFT-ordered spectrum into nonnegative (m = 0..N/2-1) and
    # negative (m = -N/2..-1) blocks; each is a geometric progression in j.
    halfN = g.N // 2
    y0 = -g.L / factor
    dy = g.dx / factor
    base = np.pi / g.L  # frequency spacing
    out = np.zeros(g.N, dtype=complex)
    for coeffs, m0 in ((fh[:halfN], 0), (fh[halfN:], -halfN)):
        # sum_k coeffs[k] e^{i base (m0+k) y_j}
        #   = e^{i base m0 y_j} * czt over k with ratio e^{i base y_j}
        a = np.exp(-1j * base * y0)        # czt convention: X_j = sum_k c_k a^{-k} w^{jk}
        w = np.exp(1j * base * dy)
        block = czt(coeffs, m=g.N, w=w, a=a)
        out += block * np.exp(1j * base * m0 * (y0 + dy * np.arange(g.N)))
    return out
