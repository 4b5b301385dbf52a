import numpy as np
import pytest

from zenospec import (
    NoiseModel,
    TruncationError,
    build_filter_bank,
    chi_from_survivals,
    chi_theory,
    effective_control,
    factorized_probabilities,
    fidelity_chi,
    fidelity_spectrum,
    psd_value,
    reconstruct_spectrum,
    sample_realization,
    square_wave_control,
    symmetric_eigendecomposition,
    tau_offset_correction,
)
from zenospec.estimator import EigenConvergenceError
from zenospec.filters import trapezoid_weights

from conftest import BAND, N_MEAS, OMEGA0, OMEGA_N, OMEGA_N0, gaussian_model

GRID = np.linspace(BAND[0], BAND[1], 2001)
TAUS = np.linspace(1.5e-6, 4.5e-6, 15)


def paper_bank(taus=TAUS, grid=GRID):
    return build_filter_bank(taus, grid, OMEGA0, N_MEAS)


def grid_chi(model, bank):
    """Analytic chi via the same trapezoid inner product that builds A."""
    s = np.asarray(psd_value(model, bank.omega_grid))
    return (bank.filters * trapezoid_weights(bank.omega_grid)) @ s


class TestChiFromSurvivals:
    def test_constant_samples_give_zero(self):
        point = chi_from_survivals(np.full(10, 0.37), 0.37)
        assert point.chi == 0.0 and point.q_used == 10

    def test_two_point_variance(self):
        # ln ratios are {-1, +1}: unbiased variance 2, chi carries the 1/4
        # factor that aligns the estimator with the overlap-integral scale
        p_ref = 0.2
        point = chi_from_survivals([np.exp(-1) * p_ref, np.exp(1) * p_ref], p_ref)
        np.testing.assert_allclose(point.chi, 0.5, rtol=1e-12)
        np.testing.assert_allclose(point.std_error, 0.5 * np.sqrt(2.0), rtol=1e-12)

    def test_reference_only_shifts_logs(self):
        p = np.array([0.1, 0.2, 0.4])
        a = chi_from_survivals(p, 0.3).chi
        b = chi_from_survivals(p, 0.9).chi
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_single_tone_simulation_matches_theory(self):
        # Q = 200 weak-Zeno survivals at tau = 3 us versus the overlap integral
        tau = 3e-6
        ctrl = square_wave_control(OMEGA0, N_MEAS, tau)
        tone = NoiseModel.single_tone(OMEGA_N0, OMEGA_N)
        p = np.empty(200)
        p_c = None
        for i in range(p.size):
            r = sample_realization(tone, 1, None, 31_000 + i)
            p_c, p_n, p_cn = factorized_probabilities(ctrl, r, N_MEAS, tau)
            p[i] = p_c * p_n * p_cn
        point = chi_from_survivals(p, p_c)
        theory = chi_theory(tone, effective_control(ctrl), BAND[1])
        assert abs(point.chi - theory) < 3 * point.std_error

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError, match="Q = 2"):
            chi_from_survivals([0.5], 0.5)
        with pytest.raises(ValueError, match="log undefined"):
            chi_from_survivals([0.5, 0.0], 0.5)
        with pytest.raises(ValueError, match="reference"):
            chi_from_survivals([0.5, 0.6], 0.0)


class TestJacobi:
    def test_identity(self):
        lam, v = symmetric_eigendecomposition(np.eye(4))
        np.testing.assert_array_equal(lam, np.ones(4))
        np.testing.assert_allclose(v @ v.T, np.eye(4), atol=1e-15)

    def test_already_diagonal(self):
        lam, v = symmetric_eigendecomposition(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(lam, [3.0, 2.0, 1.0])
        # rows are signed unit vectors picking out the sorted entries
        np.testing.assert_allclose(np.abs(v), np.eye(3)[[0, 2, 1]], atol=1e-15)

    def test_random_symmetric_reconstruction(self, rng):
        a = rng.standard_normal((15, 15))
        a = a + a.T
        lam, v = symmetric_eigendecomposition(a)
        assert np.all(np.diff(lam) <= 0)
        np.testing.assert_allclose(v.T @ np.diag(lam) @ v, a, atol=1e-9)
        np.testing.assert_allclose(v @ v.T, np.eye(15), atol=1e-10)
        offdiag = v @ a @ v.T - np.diag(lam)
        assert np.max(np.abs(offdiag)) < 1e-9 * np.max(np.abs(lam))

    def test_agrees_with_lapack(self, rng):
        a = rng.standard_normal((12, 12))
        a = 0.5 * (a + a.T)
        lam, _ = symmetric_eigendecomposition(a)
        np.testing.assert_allclose(lam, np.linalg.eigvalsh(a)[::-1], atol=1e-10)

    def test_rejects_asymmetric(self):
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            symmetric_eigendecomposition(a)

    def test_sweep_budget_enforced(self):
        a = np.array([[1.0, 0.5], [0.5, 2.0]])
        with pytest.raises(EigenConvergenceError):
            symmetric_eigendecomposition(a, max_sweeps=0)


class TestReconstruction:
    def test_projection_residual_orthogonal_to_kept_basis(self):
        # analytic chi, no truncation: S_rec is the grid projection of S onto
        # the filter span, so the residual is orthogonal to every kept mode
        bank = paper_bank()
        model = gaussian_model()
        s = np.asarray(psd_value(model, bank.omega_grid))
        result = reconstruct_spectrum(grid_chi(model, bank), bank, truncation=0.0)
        w = trapezoid_weights(bank.omega_grid)
        s_norm = np.sqrt(np.sum(w * s * s))
        residual = result.s_rec - s
        for k in range(result.kept):
            overlap = np.sum(w * residual * result.basis[k])
            assert abs(overlap) / s_norm < 1e-6

    def test_single_filter_span(self):
        bank = paper_bank(taus=np.array([3e-6]))
        chi = np.array([2.5])
        result = reconstruct_spectrum(chi, bank, truncation=0.0)
        lam = result.eigenvalues[0]
        np.testing.assert_allclose(result.coefficients, [2.5 / np.sqrt(lam)], rtol=1e-12)
        np.testing.assert_allclose(
            result.s_rec, (2.5 / lam) * bank.filters[0], rtol=1e-9
        )

    def test_kept_modes_orthonormal(self):
        bank = paper_bank()
        result = reconstruct_spectrum(grid_chi(gaussian_model(), bank), bank, 1e-3)
        w = trapezoid_weights(bank.omega_grid)
        gram = (result.basis * w) @ result.basis.T
        np.testing.assert_allclose(gram, np.eye(result.kept), atol=1e-8)

    def test_eigenvalues_descending_and_kept_counted(self):
        bank = paper_bank()
        result = reconstruct_spectrum(grid_chi(gaussian_model(), bank), bank, 1e-3)
        assert np.all(np.diff(result.eigenvalues) <= 0)
        lam = result.eigenvalues
        assert result.kept == np.count_nonzero((lam > 0) & (lam >= 1e-3 * lam[0]))
        assert result.kept < bank.n_filters

    def test_all_modes_truncated_raises(self):
        bank = paper_bank(taus=np.array([2e-6, 3e-6]))
        with pytest.raises(TruncationError):
            reconstruct_spectrum(np.array([1.0, 1.0]), bank, truncation=2.0)

    def test_chi_length_mismatch_rejected(self):
        bank = paper_bank(taus=np.array([2e-6, 3e-6]))
        with pytest.raises(ValueError, match="shape"):
            reconstruct_spectrum(np.array([1.0, 1.0, 1.0]), bank, 1e-3)

    def test_in_span_spectrum_recovered_exactly(self):
        # a target built inside the filter span comes back with fidelity 1
        bank = paper_bank()
        coeffs = np.array([0.5, 1.0, 0.2, 0.8, 0.1, 0.3, 0.05, 0.4, 0.2, 0.6, 0.1, 0.3, 0.2, 0.1, 0.4])
        target = coeffs @ bank.filters
        w = trapezoid_weights(bank.omega_grid)
        chi = (bank.filters * w) @ target
        result = reconstruct_spectrum(chi, bank, truncation=0.0)
        fid = fidelity_spectrum(result.s_rec, target, bank.omega_grid)
        np.testing.assert_allclose(fid, 1.0, atol=1e-6)


class TestFidelities:
    def test_chi_proportional_vectors(self):
        a = np.array([1.0, 2.0, 3.0])
        assert fidelity_chi(a, 7.3 * a) == pytest.approx(1.0, abs=1e-12)

    def test_chi_orthogonal_vectors(self):
        assert fidelity_chi(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_chi_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            fidelity_chi(np.zeros(3), np.ones(3))

    def test_spectrum_self_fidelity(self):
        s = np.asarray(psd_value(gaussian_model(), GRID))
        assert abs(fidelity_spectrum(s, s, GRID) - 1.0) < 1e-9

    def test_spectrum_scale_invariance(self):
        sg = np.asarray(psd_value(gaussian_model(), GRID))
        sl = np.asarray(psd_value(NoiseModel.lorentzian(OMEGA_N, 2 * np.pi * 50e3, 1.0), GRID))
        f1 = fidelity_spectrum(sg, sl, GRID)
        f2 = fidelity_spectrum(123.0 * sg, 0.01 * sl, GRID)
        np.testing.assert_allclose(f1, f2, rtol=1e-12)
        assert f1 <= 1.0

    def test_spectrum_grid_mismatch_rejected(self):
        s = np.ones(GRID.size)
        with pytest.raises(ValueError, match="common shape"):
            fidelity_spectrum(s, s[:-1], GRID)

    def test_clamping_only_touches_negative_values(self):
        s = np.asarray(psd_value(gaussian_model(), GRID))
        wiggly = s - 0.3 * s.max()
        clamped = fidelity_spectrum(wiggly, s, GRID, clamp_negative=True)
        raw = fidelity_spectrum(wiggly, s, GRID, clamp_negative=False)
        assert clamped != raw
        assert fidelity_spectrum(s, s, GRID, clamp_negative=True) == pytest.approx(1.0, abs=1e-9)


class TestTauOffset:
    def test_zero_offset_identity(self):
        bank = paper_bank()
        chi = grid_chi(gaussian_model(), bank)
        chi2, bank2 = tau_offset_correction(chi, bank, 0.0)
        np.testing.assert_array_equal(chi2, chi)
        assert bank2 is bank

    def test_offset_must_stay_small(self):
        bank = paper_bank()
        chi = np.ones(bank.n_filters)
        with pytest.raises(ValueError, match="small correction"):
            tau_offset_correction(chi, bank, TAUS[0])

    def test_matched_offset_improves_fidelity(self):
        # data generated with every interval stretched by tau_m / 2: pairing
        # the unchanged chi with filters at tau + tau_m / 2 must beat the
        # nominal-tau pairing
        from zenospec import NoiseModel, alphas

        tau_m = 0.6e-6
        model = gaussian_model()
        rng_base = 52_000
        chi = np.empty(TAUS.size)
        for k, tau in enumerate(TAUS):
            tau_eff = tau + tau_m / 2
            ctrl = square_wave_control(OMEGA0, N_MEAS, tau_eff)
            logs = np.empty(200)
            for q in range(logs.size):
                r = sample_realization(model, 400, BAND, rng_base + 997 * k + q)
                _, _, p_cn = factorized_probabilities(ctrl, r, N_MEAS, tau_eff)
                logs[q] = np.log(p_cn)
            chi[k] = 0.25 * np.var(logs, ddof=1)
        bank = paper_bank()
        s_orig = np.asarray(psd_value(model, bank.omega_grid))
        rec0 = reconstruct_spectrum(chi, bank, 1e-3)
        fid0 = fidelity_spectrum(rec0.s_rec, s_orig, bank.omega_grid)
        chi_off, bank_off = tau_offset_correction(chi, bank, tau_m / 2)
        rec1 = reconstruct_spectrum(chi_off, bank_off, 1e-3)
        fid1 = fidelity_spectrum(rec1.s_rec, s_orig, bank_off.omega_grid)
        assert fid1 > fid0
        assert fid1 >= 0.93
