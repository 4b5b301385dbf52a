import numpy as np
import pytest

from zenospec import (
    EffectiveControl,
    NoiseModel,
    build_filter_bank,
    chi_theory,
    effective_control,
    filter_function,
    overlap_matrix,
    sample_realization,
    shift_bank,
    square_wave_control,
)
from zenospec.dynamics import factorized_probabilities
from zenospec.filters import trapezoid_weights

from conftest import BAND, N_MEAS, OMEGA0, OMEGA_N, OMEGA_N0, TWO_PI, gaussian_model

GRID = np.linspace(BAND[0], BAND[1], 2001)


def square_ec(tau, omega0=OMEGA0, n=N_MEAS):
    return effective_control(square_wave_control(omega0, n, tau))


class TestEffectiveControl:
    def test_zero_control(self):
        ec = effective_control(square_wave_control(0.0, 5, 1e-6))
        assert np.all(ec.values == 0.0)

    def test_square_wave_closed_form(self):
        ec = square_ec(2e-6, n=2)
        np.testing.assert_array_equal(ec.values, [-OMEGA0 * 2e-6, OMEGA0 * 2e-6])

    def test_matches_dense_quadrature_for_arbitrary_control(self, rng):
        from zenospec import ControlWaveform

        tau = 1.7e-6
        values = rng.uniform(-OMEGA0, OMEGA0, 9)
        ec = effective_control(ControlWaveform(values, tau))
        for j in range(9):
            t = np.linspace(j * tau, (j + 1) * tau, 10_001)
            oracle = np.trapezoid(np.full_like(t, values[j]), t)
            np.testing.assert_allclose(ec.values[j], oracle, rtol=1e-12)


class TestFilterFunction:
    def test_zero_control_gives_zero_filter(self):
        ec = effective_control(square_wave_control(0.0, N_MEAS, 2e-6))
        assert np.all(filter_function(ec, GRID) == 0.0)

    def test_nonnegative_and_continuous_at_zero(self):
        ec = square_ec(3e-6)
        w = np.linspace(0.0, BAND[1], 5001)
        f = filter_function(ec, w)
        assert np.all(f >= 0.0)
        # analytic omega -> 0 limit: for an even-length square wave the comb
        # cancels, so F(0) = 0 and small omega stay small
        assert f[0] == pytest.approx(0.0, abs=1e-30)
        assert f[1] < f.max() * 1e-3

    def test_odd_length_zero_limit_matches_series(self):
        # odd N leaves one uncancelled interval: F(0) = (Omega0 tau * tau)^2
        tau = 2e-6
        ec = square_ec(tau, n=5)
        expected = (OMEGA0 * tau * tau) ** 2
        np.testing.assert_allclose(filter_function(ec, 0.0), expected, rtol=1e-12)
        np.testing.assert_allclose(filter_function(ec, 1e-4), expected, rtol=1e-6)

    def test_peak_at_control_fundamental(self):
        # alternating signs add coherently at omega = pi / tau; the 1/omega^2
        # interval-transform envelope tilts the true maximum ~0.4% below it,
        # so the one-grid-step statement holds on a kHz-resolution search
        tau = 3e-6
        ec = square_ec(tau)
        w = np.linspace(BAND[0], BAND[1], 201)
        f = filter_function(ec, w)
        argmax = w[np.argmax(f)]
        step = w[1] - w[0]
        assert abs(argmax - np.pi / tau) <= step
        fine = np.linspace(BAND[0], BAND[1], 20_001)
        fine_argmax = fine[np.argmax(filter_function(ec, fine))]
        assert abs(fine_argmax - np.pi / tau) < 0.005 * np.pi / tau
        # pi / (3 us) corresponds to 166.7 kHz in ordinary frequency
        assert abs(argmax / (TWO_PI * 1e3) - 166.67) < 1.1

    def test_peak_value_closed_form(self):
        # at resonance the comb sums to N and the interval transform to 2/omega
        tau = 3e-6
        w = np.pi / tau
        expected = (2.0 / w) ** 2 * (N_MEAS * OMEGA0 * tau) ** 2
        np.testing.assert_allclose(filter_function(square_ec(tau), w), expected, rtol=1e-10)

    def test_scalar_and_array_agree(self):
        ec = square_ec(2.2e-6)
        w = np.array([BAND[0], 1.1e6, BAND[1]])
        vec = filter_function(ec, w)
        np.testing.assert_allclose(vec, [filter_function(ec, x) for x in w], rtol=1e-12)


class TestChiTheory:
    def test_zero_amplitude_noise(self):
        assert chi_theory(gaussian_model(rms=0.0), square_ec(3e-6), BAND[1]) == 0.0
        tone = NoiseModel.single_tone(0.0, OMEGA_N)
        assert chi_theory(tone, square_ec(3e-6), BAND[1]) == 0.0

    def test_single_tone_closed_form(self):
        ec = square_ec(3e-6)
        tone = NoiseModel.single_tone(OMEGA_N0, OMEGA_N)
        expected = 0.5 * OMEGA_N0**2 * filter_function(ec, OMEGA_N)
        assert chi_theory(tone, ec, BAND[1]) == expected

    def test_single_tone_beyond_cut_contributes_nothing(self):
        tone = NoiseModel.single_tone(OMEGA_N0, OMEGA_N)
        assert chi_theory(tone, square_ec(3e-6), OMEGA_N / 2) == 0.0

    def test_resonance_maximal_on_tau_grid(self):
        tone = NoiseModel.single_tone(OMEGA_N0, OMEGA_N)
        taus = np.linspace(1.5e-6, 4.5e-6, 13)
        chis = [chi_theory(tone, square_ec(t), BAND[1]) for t in taus]
        assert np.argmax(chis) == np.argmin(np.abs(taus - np.pi / OMEGA_N))

    def test_scale_quadratics(self):
        # chi scales with the square of both control and noise amplitudes
        ec1, ec2 = square_ec(2.4e-6, omega0=OMEGA0), square_ec(2.4e-6, omega0=2 * OMEGA0)
        m1, m2 = gaussian_model(), gaussian_model(rms=2 * TWO_PI * 12e3)
        c11 = chi_theory(m1, ec1, BAND[1])
        np.testing.assert_allclose(chi_theory(m1, ec2, BAND[1]), 4 * c11, rtol=1e-5)
        np.testing.assert_allclose(chi_theory(m2, ec1, BAND[1]), 4 * c11, rtol=1e-5)

    def test_broadband_quadrature_against_fine_trapezoid(self):
        m = gaussian_model()
        ec = square_ec(3e-6)
        w = np.linspace(1.0, BAND[1], 200_001)
        oracle = np.trapezoid(np.asarray(filter_function(ec, w)) * psd_vals(m, w), w)
        np.testing.assert_allclose(chi_theory(m, ec, BAND[1]), oracle, rtol=1e-5)

    def test_monte_carlo_convention_keystone_single_tau(self):
        # 1/4 <ln^2 p_cn> over uniform random phases must match the overlap
        # integral with unit normalization at tau = 3 us (full grid sweep is
        # exercised by the acceptance suite)
        tau = 3e-6
        ctrl = square_wave_control(OMEGA0, N_MEAS, tau)
        tone = NoiseModel.single_tone(OMEGA_N0, OMEGA_N)
        logs2 = np.empty(4000)
        for i in range(logs2.size):
            r = sample_realization(tone, 1, None, 77_000 + i)
            logs2[i] = np.log(factorized_probabilities(ctrl, r, N_MEAS, tau)[2]) ** 2
        mc = 0.25 * logs2.mean()
        se = 0.25 * logs2.std(ddof=1) / np.sqrt(logs2.size)
        theory = chi_theory(tone, square_ec(tau), BAND[1])
        assert abs(mc - theory) < 3 * se


def psd_vals(model, w):
    from zenospec import psd_value

    return np.asarray(psd_value(model, w))


class TestOverlapMatrix:
    def test_single_filter(self):
        bank = build_filter_bank(np.array([3e-6]), GRID, OMEGA0, N_MEAS)
        assert bank.overlap.shape == (1, 1)
        assert bank.overlap[0, 0] > 0.0

    def test_symmetry_is_exact(self):
        bank = build_filter_bank(np.linspace(1.5e-6, 4.5e-6, 15), GRID, OMEGA0, N_MEAS)
        assert np.array_equal(bank.overlap, bank.overlap.T)

    def test_positive_semidefinite(self):
        bank = build_filter_bank(np.linspace(1.5e-6, 4.5e-6, 15), GRID, OMEGA0, N_MEAS)
        lam = np.linalg.eigvalsh(bank.overlap)
        assert lam.min() >= -1e-10 * lam.max()

    def test_duplicate_rows_give_null_eigenvalue(self):
        taus = np.array([2e-6, 3e-6])
        bank = build_filter_bank(taus, GRID, OMEGA0, N_MEAS)
        dup = np.vstack([bank.filters, bank.filters[1]])
        a = overlap_matrix(GRID, dup)
        lam = np.linalg.eigvalsh(a)
        assert abs(lam[0]) <= 1e-10 * lam[-1]

    def test_matches_ten_times_finer_grid(self):
        taus = np.linspace(1.5e-6, 4.5e-6, 15)
        coarse = build_filter_bank(taus, GRID, OMEGA0, N_MEAS).overlap
        fine_grid = np.linspace(BAND[0], BAND[1], 20_001)
        fine = build_filter_bank(taus, fine_grid, OMEGA0, N_MEAS).overlap
        np.testing.assert_allclose(coarse, fine, rtol=1e-4)

    def test_grid_mismatch_rejected(self):
        bank = build_filter_bank(np.array([2e-6, 3e-6]), GRID, OMEGA0, N_MEAS)
        with pytest.raises(ValueError, match="common grid"):
            overlap_matrix(GRID[:-1], bank.filters)

    def test_trapezoid_weights_sum_to_span(self):
        w = trapezoid_weights(GRID)
        np.testing.assert_allclose(w.sum(), GRID[-1] - GRID[0], rtol=1e-14)


class TestShiftBank:
    def test_zero_offset_returns_same_bank(self):
        bank = build_filter_bank(np.array([2e-6, 3e-6]), GRID, OMEGA0, N_MEAS)
        assert shift_bank(bank, 0.0) is bank

    def test_shifted_rows_match_direct_build(self):
        taus = np.array([2e-6, 3e-6])
        bank = build_filter_bank(taus, GRID, OMEGA0, N_MEAS)
        shifted = shift_bank(bank, 0.3e-6)
        direct = build_filter_bank(taus + 0.3e-6, GRID, OMEGA0, N_MEAS)
        np.testing.assert_array_equal(shifted.filters, direct.filters)
        # nominal tau labels are preserved for pairing with chi data
        np.testing.assert_array_equal(shifted.taus, taus)
