import numpy as np
import pytest
from scipy.integrate import quad

from cnls.grid import ComplexField, derivative, make_grid
from cnls.profiles import (XNormParams, double_ground_state,
                           double_gs_omega_interval, infimum_certificate,
                           polynomial_decay, quadratic_phase,
                           sech_ground_state, x_norm)
from cnls.diagnostics import mass


class TestXNormParams:
    def test_defaults(self):
        p = XNormParams(n=1.0)
        assert p.r == 3 and p.M == 4
        assert p.s_n == pytest.approx(0.25)  # midpoint of (0, 1/2)
        assert XNormParams(n=2.0).s_n == 1.0

    @pytest.mark.parametrize("kw", [dict(n=0.5), dict(n=1.0, r=2),
                                    dict(n=1.0, r=3, M=3),
                                    dict(n=1.0, s_n=0.7)])
    def test_rejects_bad_parameters(self, kw):
        with pytest.raises(ValueError):
            XNormParams(**kw)


class TestPolynomialDecay:
    def test_value_at_origin(self, grid12):
        u = polynomial_decay(3.0, 1.0, grid12)
        assert u.values[np.argmin(np.abs(grid12.x))] == pytest.approx(3.0)

    def test_weight_cancels_decay(self, grid12):
        u = polynomial_decay(2.0, 1.5, grid12)
        cert = infimum_certificate(u, 1.5, lambda0=2.0 - 1e-12)
        assert cert.lambda_ == pytest.approx(2.0)
        assert cert.passes

    def test_borderline_half_power(self, grid12):
        u = polynomial_decay(0.1, 0.5, grid12)
        assert np.allclose(np.abs(u.values), 0.1 * (1 + grid12.x**2) ** -0.25)


class TestSechGroundState:
    def test_closed_form_values(self, grid12):
        q = sech_ground_state(0.5, 0.5, grid12)
        assert np.max(q.values.real) == pytest.approx(6.25, rel=1e-12)
        q2 = sech_ground_state(2.0, 1.0, grid12)
        assert np.max(q2.values.real) == pytest.approx(np.sqrt(2), rel=1e-12)
        assert np.allclose(q2.values.real, np.sqrt(2) / np.cosh(grid12.x), atol=1e-12)

    @pytest.mark.parametrize("alpha,eps", [(0.5, 0.5), (2.0, 1.0), (1.0, 2.0)])
    def test_ode_residual(self, grid12, alpha, eps):
        q = sech_ground_state(alpha, eps, grid12)
        res = (-q.values + derivative(q, 2).values
               + eps * np.abs(q.values) ** alpha * q.values)
        assert np.max(np.abs(res)) <= 1e-8


class TestDoubleGroundState:
    def test_admissible_interval_cubic_quintic(self):
        lo, hi = double_gs_omega_interval(2.0, 1.0, -1.0)
        assert (lo, hi) == (0.0, pytest.approx(3.0 / 16.0))

    def test_value_at_origin(self, grid12):
        q = double_ground_state(2.0, 1.0, -1.0, 0.15, grid12)
        expect = (0.15 / (0.25 + np.sqrt(0.25**2 - 0.15 / 3.0))) ** 0.5
        assert np.max(q.values.real) == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(0.6439, abs=1e-4)

    @pytest.mark.parametrize("omega", [3.0 / 16.0, 0.2, 0.5, -0.1, 0.0])
    def test_rejects_outside_interval(self, grid12, omega):
        with pytest.raises(ValueError, match="admissible"):
            double_ground_state(2.0, 1.0, -1.0, omega, grid12)

    def test_ode_residual(self, grid14):
        q = double_ground_state(2.0, 1.0, -1.0, 0.15, grid14)
        v = q.values
        res = (-0.15 * v + derivative(q, 2).values + v**3 - v**5)
        assert np.max(np.abs(res)) <= 1e-8


class TestQuadraticPhase:
    def test_zero_phase_identity(self, gauss12):
        out = quadratic_phase(gauss12, 0.0)
        assert np.array_equal(out.values, gauss12.values)

    def test_modulus_and_mass_invariant(self, gauss12):
        out = quadratic_phase(gauss12, 3.7)
        assert np.allclose(np.abs(out.values), np.abs(gauss12.values))
        assert mass(out) == pytest.approx(mass(gauss12), rel=1e-15)

    def test_inverse_phase(self, gauss12):
        back = quadratic_phase(quadratic_phase(gauss12, 2.4), -2.4)
        assert np.max(np.abs(back.values - gauss12.values)) <= 1e-14


def _gaussian_xnorm_oracle() -> float:
    """All seven summands for u = e^{-x^2}, p = (n=1, r=3, M=4), by quadrature."""
    # sup <x> e^{-x^2}: maximum of (1+x^2) e^{-2x^2} sits at x = 0
    total = 1.0
    derivs = [
        lambda x: -2 * x * np.exp(-(x**2)),
        lambda x: (4 * x**2 - 2) * np.exp(-(x**2)),
        lambda x: (12 * x - 8 * x**3) * np.exp(-(x**2)),
    ]
    for d in derivs:
        val, _ = quad(lambda x: (1 + x**2) * d(x) ** 2, -np.inf, np.inf,
                      epsabs=1e-13)
        total += np.sqrt(val)
    # ||J^4 u||^2 = (1/2pi) int <xi>^8 |pi^(1/2) e^{-xi^2/4}|^2
    val, _ = quad(lambda xi: (1 + xi**2) ** 4 * np.pi * np.exp(-(xi**2) / 2.0)
                  / (2 * np.pi), -np.inf, np.inf, epsabs=1e-13)
    return total + np.sqrt(val)


class TestXNorm:
    def test_zero_field(self, grid12):
        z = ComplexField(grid12, np.zeros(grid12.N))
        assert x_norm(z, XNormParams(n=1.0)) == 0.0

    def test_first_summand_for_matched_decay(self, grid12):
        u = polynomial_decay(2.5, 1.0, grid12)
        w = grid12.weight(1.0)
        assert np.max(w * np.abs(u.values)) == pytest.approx(2.5)

    def test_gaussian_oracle(self, grid12, gauss12):
        val = x_norm(gauss12, XNormParams(n=1.0, r=3, M=4))
        assert val == pytest.approx(_gaussian_xnorm_oracle(), abs=1e-6)

    def test_absolute_homogeneity(self, grid12, gauss12):
        p = XNormParams(n=1.0)
        base = x_norm(gauss12, p)
        for c in (0.3, 2.0, -1.7, 1j * 0.9):
            scaled = ComplexField(grid12, c * gauss12.values)
            assert x_norm(scaled, p) == pytest.approx(abs(c) * base, rel=1e-12)


class TestInfimumCertificate:
    def test_matched_decay_passes(self, grid12):
        lam = 0.8
        u = ComplexField(grid12,
                         2 * lam * np.exp(0.7j) * (1 + grid12.x**2) ** -0.5)
        cert = infimum_certificate(u, 1.0, lambda0=lam)
        assert cert.lambda_ == pytest.approx(2 * lam)
        assert cert.passes

    def test_zero_crossing_fails(self, grid12):
        u = ComplexField(grid12, np.sin(grid12.x))
        cert = infimum_certificate(u, 1.0, lambda0=1e-6)
        assert cert.lambda_ == pytest.approx(0.0, abs=1e-12)
        assert not cert.passes

    def test_sech_refined_grid_oracle(self, grid12):
        u = ComplexField(grid12, 1.0 / np.cosh(grid12.x))
        cert = infimum_certificate(u, 1.0)
        fine = make_grid(grid12.L, 8 * grid12.N)  # 8x refinement, same domain
        uf = ComplexField(fine, 1.0 / np.cosh(fine.x))
        cert_fine = infimum_certificate(uf, 1.0)
        assert cert.lambda_ == pytest.approx(cert_fine.lambda_, abs=1e-6)

    def test_certificate_invariant_under_phase(self, grid12, gauss12):
        a = infimum_certificate(gauss12, 1.0)
        b = infimum_certificate(quadratic_phase(gauss12, 5.0), 1.0)
        assert a.lambda_ == b.lambda_
        assert a.tail_value == b.tail_value
