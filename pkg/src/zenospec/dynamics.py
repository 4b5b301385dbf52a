"""Survival probability of the two-level probe under N projective measurements.

Between consecutive projections the probe picks up a rotation angle

    alpha_j = integral_{(j-1) tau}^{j tau} [Omega_c(t) + Omega_n(t)] dt,

and the probability of surviving all N projections onto the initial state is
the exact product P = prod_j cos^2(alpha_j).  In the weak-Zeno regime
(alpha_j^4 << 1) the log survival factorizes into control-only, noise-only
and cross terms,

    P ~ exp(-sum alpha_j^2) = P_c * P_n * P_cn,

whose cross term P_cn carries the control-noise correlations that the
sensing protocol extracts.  A brute-force state-vector propagator is kept
alongside as an independent oracle for the product formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import NoiseRealization, interval_integrals
from .protocol import ControlWaveform


@dataclass(frozen=True)
class SurvivalRecord:
    """One protocol repetition: exact survival and its weak-Zeno factors."""

    tau: float
    realization_seed: int
    p: float
    p_c: float
    p_n: float
    p_cn: float


def alphas(
    control: ControlWaveform,
    noise: NoiseRealization,
    n: int,
    tau: float,
) -> np.ndarray:
    """Accumulated rotation angles alpha_j, j = 1..n (exact interval integrals)."""
    if control.n_intervals != n:
        raise ValueError(
            f"control waveform has {control.n_intervals} intervals, expected {n}"
        )
    return control.interval_values * tau + interval_integrals(noise, n, tau)


def survival_probability(alpha: np.ndarray) -> float:
    """Exact N-projection survival prod_j cos^2(alpha_j)."""
    return float(np.prod(np.cos(np.asarray(alpha, dtype=float)) ** 2))


def factorized_probabilities(
    control: ControlWaveform,
    noise: NoiseRealization,
    n: int,
    tau: float,
) -> tuple[float, float, float]:
    """Weak-Zeno factors (P_c, P_n, P_cn) from exact interval integrals.

    P_c  = exp(-sum_j c_j^2)        control only
    P_n  = exp(-sum_j w_j^2)        noise only
    P_cn = exp(-2 sum_j c_j w_j)    cross term (may exceed 1)

    with c_j, w_j the per-interval integrals of control and noise.  The
    formulas are evaluated unconditionally; judging weak-Zeno validity
    (|alpha_j| small) is the caller's concern.
    """
    if control.n_intervals != n:
        raise ValueError(
            f"control waveform has {control.n_intervals} intervals, expected {n}"
        )
    c = control.interval_values * tau
    w = interval_integrals(noise, n, tau)
    p_c = float(np.exp(-np.sum(c**2)))
    p_n = float(np.exp(-np.sum(w**2)))
    p_cn = float(np.exp(-2.0 * np.sum(c * w)))
    return p_c, p_n, p_cn


def unitary_oracle(
    control: ControlWaveform,
    noise: NoiseRealization,
    n: int,
    tau: float,
    substeps: int = 1,
) -> float:
    """Brute-force propagation oracle for :func:`survival_probability`.

    Evolves the two-component state by the exact rotation exp(-i theta sigma_x)
    on each of ``substeps`` slices per interval (theta = accumulated phase over
    the slice), multiplies the running survival by |<0|psi>|^2 at each
    projection and re-projects onto the initial state.  All Hamiltonian pieces
    commute, so the result must agree with the product formula for any number
    of substeps.
    """
    if control.n_intervals != n:
        raise ValueError(
            f"control waveform has {control.n_intervals} intervals, expected {n}"
        )
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    dt = tau / substeps
    survival = 1.0
    for j in range(n):
        psi = np.array([1.0 + 0.0j, 0.0 + 0.0j])
        slice_bounds = j * tau + np.arange(substeps + 1) * dt
        noise_slices = _slice_integrals(noise, slice_bounds)
        for s in range(substeps):
            theta = control.interval_values[j] * dt + noise_slices[s]
            rot = np.array(
                [
                    [np.cos(theta), -1j * np.sin(theta)],
                    [-1j * np.sin(theta), np.cos(theta)],
                ]
            )
            psi = rot @ psi
        survival *= float(np.abs(psi[0]) ** 2)
    return survival


def _slice_integrals(noise: NoiseRealization, bounds: np.ndarray) -> np.ndarray:
    s = np.sin(np.multiply.outer(bounds, noise.frequencies) + noise.phases)
    return np.diff(s, axis=0) @ (noise.amplitudes / noise.frequencies)
