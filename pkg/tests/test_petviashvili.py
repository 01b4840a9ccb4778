import numpy as np
import pytest

from cnls.nonlinearity import SeriesNonlinearity
from cnls.petviashvili import (PetviashviliDiverged, ground_state_residual,
                               solve_ground_state)
from cnls.profiles import double_ground_state, gaussian, sech_ground_state

SN = SeriesNonlinearity
CUBIC = SN.single_power(1.0, 2.0)
CUBIC_QUINTIC = SN.finite_sum([(1.0, 2.0), (-1.0, 4.0)])


class TestExplicitOracles:
    def test_cubic_matches_sech(self, grid14):
        res = solve_ground_state(CUBIC, 1.0, grid14, tol=1e-12)
        exact = sech_ground_state(2.0, 1.0, grid14)
        assert np.max(np.abs(res.Q.values - exact.values)) <= 1e-10
        assert res.residual_inf <= 1e-10

    def test_cubic_quintic_matches_explicit(self, grid14):
        res = solve_ground_state(CUBIC_QUINTIC, 0.15, grid14, tol=1e-12)
        exact = double_ground_state(2.0, 1.0, -1.0, 0.15, grid14)
        assert np.max(np.abs(res.Q.values - exact.values)) <= 1e-10

    def test_single_low_power(self, grid14):
        series = SN.single_power(0.5, 0.5)
        res = solve_ground_state(series, 1.0, grid14, tol=1e-11)
        exact = sech_ground_state(0.5, 0.5, grid14)
        assert np.max(np.abs(res.Q.values - exact.values)) <= 1e-9


class TestIterationContract:
    def test_plug_back_residual(self, grid14):
        tol = 1e-11
        res = solve_ground_state(CUBIC_QUINTIC, 0.15, grid14, tol=tol)
        assert res.residual_inf <= 10 * tol

    def test_stabilizer_tends_to_one(self, grid14):
        res = solve_ground_state(CUBIC, 1.0, grid14, tol=1e-12)
        assert abs(res.stabilizer_history[-1] - 1.0) <= 1e-8

    def test_result_positive_even_decreasing(self, grid14):
        res = solve_ground_state(CUBIC_QUINTIC, 0.15, grid14, tol=1e-12)
        v = res.Q.values.real
        assert np.all(v > -1e-14)
        mid = grid14.N // 2
        assert np.max(np.abs(v[1:] - v[1:][::-1])) <= 1e-10  # even about x=0
        right = v[mid:]
        assert np.all(np.diff(right) <= 1e-12)  # decreasing in |x|

    @pytest.mark.parametrize("height", [0.5, 1.0, 2.0])
    def test_seed_robustness(self, grid14, height):
        seed = gaussian(height, 1.0 / np.sqrt(0.15), grid14)
        res = solve_ground_state(CUBIC_QUINTIC, 0.15, grid14, seed=seed, tol=1e-12)
        exact = double_ground_state(2.0, 1.0, -1.0, 0.15, grid14)
        assert np.max(np.abs(res.Q.values - exact.values)) <= 1e-8

    def test_even_seed_preserves_evenness(self, grid14):
        res = solve_ground_state(CUBIC, 1.0, grid14, tol=1e-12)
        v = res.Q.values.real
        assert np.max(np.abs(v[1:] - v[1:][::-1])) <= 1e-12

    def test_fixed_gamma_matches_auto_on_cubic(self, grid14):
        # 1.5 is the classical exponent for a single cubic power
        auto = solve_ground_state(CUBIC, 1.0, grid14, tol=1e-12)
        fixed = solve_ground_state(CUBIC, 1.0, grid14, gamma=1.5, tol=1e-12)
        assert np.max(np.abs(auto.Q.values - fixed.Q.values)) <= 1e-10


class TestHardFamilies:
    def test_exponential_family_profile(self, grid14):
        series = SN.exp_full(scale=0.025, r=1.0)
        res = solve_ground_state(series, 0.1, grid14, tol=1e-11)
        v = res.Q.values.real
        assert np.all(v > -1e-14)
        assert np.max(np.abs(v[1:] - v[1:][::-1])) <= 1e-9
        assert res.residual_inf <= 1e-10
        assert 1.5 < np.max(v) < 2.5  # tall bound state, not the zero solution

    def test_exponential_square_family(self, grid14):
        series = SN.exp_full(scale=0.05, r=2.0)
        res = solve_ground_state(series, 0.1, grid14, tol=1e-11)
        assert res.residual_inf <= 1e-10
        assert np.max(res.Q.values.real) > 0.5

    def test_mixed_low_high_family(self, grid14):
        series = SN.finite_sum([(0.1, 0.5), (0.9, 4.0)])
        res = solve_ground_state(series, 0.1, grid14, tol=1e-12)
        assert res.residual_inf <= 1e-11
        # mass ratio against the single critical-power state: about 1.15
        from cnls.diagnostics import mass
        m_mixed = mass(res.Q)
        crit = solve_ground_state(SN.single_power(0.9, 4.0), 0.1, grid14, tol=1e-12)
        assert mass(crit.Q) / m_mixed == pytest.approx(1.1537, abs=2e-3)

    def test_degenerate_omega_rejected(self, grid14):
        with pytest.raises(ValueError, match="omega"):
            solve_ground_state(CUBIC, 1e-9, grid14)

    def test_sign_bad_seed_diverges_cleanly(self, grid14):
        # purely defocusing: no ground state exists, the solver must say so
        series = SN.single_power(-1.0, 2.0)
        with pytest.raises(PetviashviliDiverged):
            solve_ground_state(series, 1.0, grid14, max_iter=200)

    def test_residual_helper_on_exact_state(self, grid14):
        exact = sech_ground_state(2.0, 1.0, grid14)
        res = ground_state_residual(exact.values, 1.0, grid14, CUBIC)
        assert res <= 1e-8
