"""Initial-data families and weighted-space diagnostics.

Profiles: slow polynomial decay A<x>^-n, the explicit sech-type single-power
ground state, the explicit two-power ground state, and the quadratic phase
wrapper.  Diagnostics: the weighted norm combining a weighted sup norm,
weighted derivative L2 norms, and a high-order Bessel norm, plus the
non-vanishing (infimum) certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, Grid, bessel, derivative, l2_norm

__all__ = [
    "XNormParams",
    "InfimumCertificate",
    "polynomial_decay",
    "gaussian",
    "sech_ground_state",
    "double_ground_state",
    "double_gs_omega_interval",
    "quadratic_phase",
    "x_norm",
    "infimum_certificate",
]


@dataclass(frozen=True)
class XNormParams:
    """Parameters (n, r, M) of the weighted norm plus the scattering order s_n.

    Requires n > 1/2, r >= 3, M >= n + r.  The scattering regularity is
    s_n = 1 for n > 3/2 and must lie in (0, n - 1/2) otherwise; the default
    picks the midpoint of that interval.
    """

    n: float
    r: int = 3
    M: int | None = None
    s_n: float | None = None

    def __post_init__(self) -> None:
        if self.n <= 0.5:
            raise ValueError(f"weight power must exceed 1/2, got n={self.n}")
        if self.r < 3:
            raise ValueError(f"derivative count must be >= 3, got r={self.r}")
        M = self.M if self.M is not None else math.ceil(self.n + self.r)
        if M < self.n + self.r:
            raise ValueError(f"need M >= n + r = {self.n + self.r}, got M={M}")
        object.__setattr__(self, "M", int(M))
        if self.s_n is None:
            s = 1.0 if self.n > 1.5 else (self.n - 0.5) / 2.0
        else:
            s = self.s_n
            if self.n <= 1.5 and not (0.0 < s < self.n - 0.5):
                raise ValueError(f"s_n={s} outside (0, {self.n - 0.5})")
        object.__setattr__(self, "s_n", float(s))


@dataclass(frozen=True)
class InfimumCertificate:
    """Grid infimum of <x>^n |u| with a pass/fail against a requested bound.

    ``lambda_`` is the exact minimum over the grid nodes; ``tail_value`` is
    the weighted modulus at the outermost nodes, standing in for the limit
    at infinity (the data families in scope have monotone tails).  Passing
    requires both to clear lambda0.
    """

    n: float
    lambda_: float
    tail_value: float
    lambda0: float
    passes: bool


def polynomial_decay(A: float, n: float, grid: Grid) -> ComplexField:
    """u0(x) = A (1+x^2)^(-n/2), the slowly decaying profile A/<x>^n."""
    if A == 0 or n <= 0:
        raise ValueError("need a nonzero amplitude and positive decay power")
    return ComplexField(grid, A * (1.0 + grid.x**2) ** (-n / 2.0))


def gaussian(A: float, width: float, grid: Grid) -> ComplexField:
    """A exp(-(x/width)^2), the default solver seed shape."""
    return ComplexField(grid, A * np.exp(-((grid.x / width) ** 2)))


def sech_ground_state(alpha: float, eps: float, grid: Grid) -> ComplexField:
    """Explicit single-power ground state of -Q + Q'' + eps Q^(alpha+1) = 0:

        Q(x) = eps^(-1/alpha) ((alpha+2)/2)^(1/alpha) sech^(2/alpha)(alpha x / 2)
    """
    if alpha <= 0 or eps <= 0:
        raise ValueError("need alpha > 0 and eps > 0")
    amp = eps ** (-1.0 / alpha) * ((alpha + 2.0) / 2.0) ** (1.0 / alpha)
    vals = amp * (1.0 / np.cosh(alpha * grid.x / 2.0)) ** (2.0 / alpha)
    return ComplexField(grid, vals)


def double_gs_omega_interval(alpha1: float, eps1: float, eps2: float) -> tuple[float, float]:
    """Admissible frequency interval (0, eps1^2/|eps2| * (alpha1+1)/(alpha1+2)^2)."""
    if eps2 >= 0:
        raise ValueError("the explicit two-power state needs a defocusing larger power (eps2 < 0)")
    hi = eps1**2 / abs(eps2) * (alpha1 + 1.0) / (alpha1 + 2.0) ** 2
    return 0.0, hi


def double_ground_state(alpha1: float, eps1: float, eps2: float, omega: float,
                        grid: Grid) -> ComplexField:
    """Explicit ground state for the two-power equation with alpha2 = 2 alpha1:

        Q(x) = ( omega / (a + sqrt(a^2 + b omega) cosh(alpha1 sqrt(omega) x)) )^(1/alpha1)

    with a = eps1/(alpha1+2), b = eps2/(alpha1+1), valid on the open interval
    0 < omega < eps1^2/|eps2| (alpha1+1)/(alpha1+2)^2.
    """
    if alpha1 <= 0:
        raise ValueError("need alpha1 > 0")
    lo, hi = double_gs_omega_interval(alpha1, eps1, eps2)
    if not (lo < omega < hi):
        raise ValueError(
            f"omega={omega} outside the admissible interval ({lo}, {hi:.6g}) "
            f"for alpha1={alpha1}, eps1={eps1}, eps2={eps2}"
        )
    a = eps1 / (alpha1 + 2.0)
    b = eps2 / (alpha1 + 1.0)
    disc = math.sqrt(a**2 + b * omega)
    vals = (omega / (a + disc * np.cosh(alpha1 * math.sqrt(omega) * grid.x))) ** (1.0 / alpha1)
    return ComplexField(grid, vals)


def quadratic_phase(u: ComplexField, b: float) -> ComplexField:
    """Multiply pointwise by the unit-modulus chirp e^{i b x^2 / 4}."""
    return ComplexField(u.grid, np.exp(0.25j * b * u.grid.x**2) * u.values, u.time)


def x_norm(u: ComplexField, p: XNormParams) -> float:
    """Weighted norm: ||<x>^n u||_inf + sum_{k=1..r} ||<x>^n d^k u||_L2 + ||J^M u||_L2."""
    w = u.grid.weight(p.n)
    total = float(np.max(w * np.abs(u.values)))
    for k in range(1, p.r + 1):
        dk = derivative(u, k)
        total += l2_norm(ComplexField(u.grid, w * dk.values))
    total += l2_norm(bessel(u, p.M))
    return total


def infimum_certificate(u: ComplexField, n: float, lambda0: float = 0.0) -> InfimumCertificate:
    """Grid minimum of <x>^n |u| plus the boundary (tail) value, vs lambda0."""
    w = u.grid.weight(n) * np.abs(u.values)
    lam = float(np.min(w))
    tail = float(min(w[0], w[-1]))
    return InfimumCertificate(
        n=n, lambda_=lam, tail_value=tail, lambda0=lambda0,
        passes=bool(lam >= lambda0 and tail >= lambda0),
    )
