"""Effective control, spectral filter functions, and their overlap matrix.

The sequence of per-interval control integrals defines a piecewise-constant
effective control Omega~_c(t).  Its windowed Fourier transform gives the
filter function

    F(omega) = | integral_0^{N tau} Omega~_c(t) e^{-i omega t} dt |^2,

evaluated here in closed form for piecewise-constant controls.  With the
package's spectral convention (S as the one-sided cosine pair of the
autocorrelation, see :mod:`zenospec.noise`) the control-noise correlation
statistic is exactly

    chi = (1/4) < ln^2 P_cn > = integral_0^inf S(omega) F(omega) d omega,

with no extra normalization constant; the Monte-Carlo consistency of this
pairing is pinned by tests.  For a single tone of amplitude a at frequency
w the integral collapses to the closed form chi = (a^2 / 2) F(w).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .noise import NoiseModel, SINGLE_TONE, psd_value
from .protocol import ControlWaveform, square_wave_control


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class EffectiveControl:
    """Per-interval integrals of the control field (rad), interval width tau."""

    values: np.ndarray
    tau: float

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(np.atleast_1d(self.values), dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("effective control needs at least one interval")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_intervals(self) -> int:
        return int(self.values.size)


def effective_control(control: ControlWaveform) -> EffectiveControl:
    """Exact interval integrals of a piecewise-constant control."""
    return EffectiveControl(control.interval_values * control.tau, control.tau)


def filter_function(ec: EffectiveControl, omega) -> np.ndarray | float:
    """Filter function F(omega) in closed form; omega scalar or array (rad/s).

    F(0) is the analytic limit (each interval transform tends to tau).
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega)
    if np.any(w < 0.0):
        raise ValueError("omega must be >= 0")
    j = np.arange(ec.n_intervals)
    comb = np.exp(-1j * np.multiply.outer(w, j * ec.tau)) @ ec.values
    with np.errstate(divide="ignore", invalid="ignore"):
        seg = (1.0 - np.exp(-1j * w * ec.tau)) / (1j * w)
    seg = np.where(w == 0.0, ec.tau, seg)
    out = np.abs(comb * seg) ** 2
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class FilterBank:
    """Filter functions F_k on a common frequency grid, one row per tau_k.

    ``control_amplitude`` and ``n_measurements`` record the square-wave
    control the rows were built from, so the bank can be re-evaluated at
    shifted taus.  ``overlap`` is the symmetric matrix
    A_kl = integral F_k F_l d omega over the grid.
    """

    omega_grid: np.ndarray
    taus: np.ndarray
    filters: np.ndarray
    overlap: np.ndarray
    control_amplitude: float
    n_measurements: int

    def __post_init__(self) -> None:
        grid = np.ascontiguousarray(self.omega_grid, dtype=float)
        taus = np.ascontiguousarray(self.taus, dtype=float)
        filt = np.ascontiguousarray(self.filters, dtype=float)
        a = np.ascontiguousarray(self.overlap, dtype=float)
        if filt.shape != (taus.size, grid.size):
            raise ValueError("filter rows must match (n_taus, grid size)")
        if a.shape != (taus.size, taus.size):
            raise ValueError("overlap must be square of size n_taus")
        for name, arr in (
            ("omega_grid", grid),
            ("taus", taus),
            ("filters", filt),
            ("overlap", a),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_filters(self) -> int:
        return int(self.taus.size)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Weights w with sum_i w_i f_i = trapezoid integral of f over grid."""
    d = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def overlap_matrix(omega_grid: np.ndarray, filters: np.ndarray) -> np.ndarray:
    """Symmetric A_kl = integral F_k F_l d omega (trapezoid on the shared grid).

    Exact symmetry is enforced by computing k <= l and mirroring.
    """
    filters = np.asarray(filters, dtype=float)
    if filters.ndim != 2 or filters.shape[1] != np.size(omega_grid):
        raise ValueError("filters must be (K, len(grid)) on the common grid")
    weighted = filters * trapezoid_weights(np.asarray(omega_grid, dtype=float))
    k = filters.shape[0]
    a = np.zeros((k, k))
    for i in range(k):
        a[i, i:] = weighted[i] @ filters[i:].T
    return np.triu(a) + np.triu(a, 1).T


def build_filter_bank(
    taus: np.ndarray,
    omega_grid: np.ndarray,
    control_amplitude: float,
    n_measurements: int,
) -> FilterBank:
    """Evaluate the square-wave filter of each tau_k on the grid and its overlap."""
    taus = np.asarray(taus, dtype=float)
    rows = np.empty((taus.size, np.size(omega_grid)))
    for k, tau in enumerate(taus):
        ec = effective_control(square_wave_control(control_amplitude, n_measurements, tau))
        rows[k] = filter_function(ec, omega_grid)
    return FilterBank(
        omega_grid=np.asarray(omega_grid, dtype=float),
        taus=taus,
        filters=rows,
        overlap=overlap_matrix(omega_grid, rows),
        control_amplitude=control_amplitude,
        n_measurements=n_measurements,
    )


def shift_bank(bank: FilterBank, offset: float) -> FilterBank:
    """Re-evaluate the bank at effective spacings tau_k + offset (same grid)."""
    if offset == 0.0:
        return bank
    shifted = build_filter_bank(
        bank.taus + offset, bank.omega_grid, bank.control_amplitude, bank.n_measurements
    )
    return replace(shifted, taus=bank.taus)


def chi_theory(
    model: NoiseModel,
    ec: EffectiveControl,
    omega_cut: float,
    rel_tol: float = 1e-6,
) -> float:
    """Theoretical chi = integral_0^{omega_cut} S(omega) F(omega) d omega.

    Single-tone models use the closed form (amplitude^2 / 2) F(frequency).
    Broadband models are integrated adaptively; if the requested relative
    tolerance is not certified by the quadrature error estimate a
    :class:`QuadratureError` carrying the achieved estimate is raised.
    """
    if omega_cut <= 0.0:
        raise ValueError("omega_cut must be positive")
    if model.kind == SINGLE_TONE:
        if model.frequency > omega_cut:
            return 0.0
        return 0.5 * model.amplitude**2 * float(filter_function(ec, model.frequency))
    if model.rms_amplitude == 0.0:
        return 0.0
    # break the domain at the filter harmonics and the line center so the
    # adaptive rule sees the lobe structure
    n_tau = ec.n_intervals * ec.tau
    harmonics = np.pi / ec.tau * np.arange(1, 60, 2)
    lobes = 2.0 * np.pi / n_tau * np.arange(1, 40)
    pts = np.concatenate((harmonics, model.center + 0.0 * harmonics[:1], lobes))
    pts = np.unique(pts[(pts > 0.0) & (pts < omega_cut)])[:80]
    val, err = quad(
        lambda w: float(psd_value(model, w)) * float(filter_function(ec, w)),
        0.0,
        omega_cut,
        epsrel=rel_tol,
        epsabs=0.0,
        limit=2000,
        points=pts,
    )
    if err > rel_tol * max(abs(val), 1e-300):
        raise QuadratureError(
            f"chi quadrature reached relative error {err / max(abs(val), 1e-300):.2e} "
            f"(absolute estimate {err:.3e}), requested {rel_tol:.1e}"
        )
    return float(val)
