"""Estimation of the correlation statistic chi and PSD reconstruction.

chi is estimated from survival data as one quarter of the unbiased sample
variance of ln(P / P_ref); the quarter keeps the estimate in the same
normalization as the theoretical overlap integral
chi = integral S F d omega = (1/4) <ln^2 P_cn> (see :mod:`zenospec.filters`).

The spectrum is expanded in the orthonormalized filter basis obtained from
the eigendecomposition V A V^T = Lambda of the filter overlap matrix:

    F^_k = (1/sqrt(lambda_k)) sum_l V_kl F_l,
    c^_k = (1/sqrt(lambda_k)) sum_l V_kl chi(tau_l),
    S_rec = sum_kept c^_k F^_k,

keeping only modes with lambda_k >= eps * lambda_max.  Comparisons use
scale-free L2-normalized overlaps (fidelities).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filters import FilterBank, shift_bank


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before off-diagonal norm fell below threshold."""


class TruncationError(RuntimeError):
    """No overlap-matrix eigenvalue passed the truncation threshold."""


@dataclass(frozen=True)
class ChiPoint:
    """chi estimate at one tau: value, normal-approximation standard error, Q."""

    chi: float
    std_error: float
    q_used: int


@dataclass(frozen=True)
class ReconstructionResult:
    """Reconstructed spectrum with the eigen/truncation bookkeeping.

    ``s_rec`` lies in the span of the kept orthonormal filters (rows of
    ``basis``) and may go negative; fidelities are filled in by the caller
    once a reference spectrum is chosen.
    """

    s_rec: np.ndarray
    eigenvalues: np.ndarray
    kept: int
    coefficients: np.ndarray
    basis: np.ndarray
    fidelity_chi: float | None = None
    fidelity_spectrum: float | None = None


def chi_from_survivals(p_samples, p_reference: float) -> ChiPoint:
    """Estimate chi from Q survival probabilities against a reference.

    Returns (1/4) x unbiased sample variance of ln(p_i / p_reference); the
    constant reference only shifts the log samples, so any positive reference
    gives the same variance.  The standard error uses the normal
    approximation Var[s^2] ~ 2 s^4 / (Q - 1).
    """
    p = np.asarray(p_samples, dtype=float)
    if p.size < 2:
        raise ValueError("need at least Q = 2 survival samples")
    if np.any(p <= 0.0):
        raise ValueError(
            "survival probability <= 0: log undefined (realization outside the "
            "weak-Zeno validity domain)"
        )
    if p_reference <= 0.0:
        raise ValueError("reference probability must be positive")
    x = np.log(p / p_reference)
    s2 = float(np.var(x, ddof=1))
    chi = 0.25 * s2
    std_error = chi * np.sqrt(2.0 / (p.size - 1))
    return ChiPoint(chi=chi, std_error=float(std_error), q_used=int(p.size))


def symmetric_eigendecomposition(
    a: np.ndarray,
    max_sweeps: int = 100,
    rel_threshold: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Returns ``(eigenvalues, v)`` with eigenvalues sorted descending and the
    ROWS of ``v`` the corresponding orthonormal eigenvectors, i.e.
    v @ a @ v.T = diag(eigenvalues).  Sweeps run until the off-diagonal
    Frobenius norm drops below ``rel_threshold`` times the matrix norm;
    exceeding ``max_sweeps`` raises :class:`EigenConvergenceError`.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    norm = np.linalg.norm(a)
    if norm > 0.0 and np.linalg.norm(a - a.T) > 1e-10 * norm:
        raise ValueError("matrix is not symmetric within 1e-10 relative")
    k = a.shape[0]
    d = 0.5 * (a + a.T)
    q = np.eye(k)
    if k == 1:
        return d[0, :1].copy(), q
    threshold = rel_threshold * max(norm, np.finfo(float).tiny)

    mask = ~np.eye(k, dtype=bool)

    def offdiag(m: np.ndarray) -> float:
        return float(np.linalg.norm(m[mask]))

    tiny = threshold / (k * k)  # negligible within the convergence budget
    for _ in range(max_sweeps):
        if offdiag(d) <= threshold:
            break
        for p in range(k - 1):
            for r in range(p + 1, k):
                apq = d[p, r]
                if abs(apq) <= tiny:
                    # a rotation this small underflows to a no-op; zeroing
                    # perturbs the spectrum below the advertised tolerance
                    d[p, r] = d[r, p] = 0.0
                    continue
                theta = 0.5 * (d[r, r] - d[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # d <- J^T d J, q <- q J with the Givens rotation in (p, r)
                dp, dr = d[:, p].copy(), d[:, r].copy()
                d[:, p] = c * dp - s * dr
                d[:, r] = s * dp + c * dr
                dp, dr = d[p, :].copy(), d[r, :].copy()
                d[p, :] = c * dp - s * dr
                d[r, :] = s * dp + c * dr
                qp, qr = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
    else:
        raise EigenConvergenceError(
            f"off-diagonal norm {offdiag(d):.3e} above threshold {threshold:.3e} "
            f"after {max_sweeps} sweeps"
        )
    eigenvalues = np.diag(d).copy()
    order = np.argsort(eigenvalues)[::-1]
    return eigenvalues[order], q[:, order].T


def reconstruct_spectrum(
    chi_data: np.ndarray,
    bank: FilterBank,
    truncation: float = 1e-3,
) -> ReconstructionResult:
    """Expand the spectrum behind the chi data in the orthonormal filter basis.

    ``truncation`` is the relative eigenvalue threshold: modes with
    lambda_k < truncation * lambda_max (or lambda_k <= 0) are dropped.
    """
    chi = np.asarray(chi_data, dtype=float)
    if chi.shape != (bank.n_filters,):
        raise ValueError(
            f"chi data has shape {chi.shape}, bank holds {bank.n_filters} filters"
        )
    if truncation < 0.0:
        raise ValueError("truncation threshold must be >= 0")
    lam, v = symmetric_eigendecomposition(bank.overlap)
    keep = (lam > 0.0) & (lam >= truncation * lam[0])
    if not np.any(keep):
        raise TruncationError("all eigenmodes fell below the truncation threshold")
    root = np.sqrt(lam[keep])
    coeffs = (v @ chi)[keep] / root
    basis = (v[keep] / root[:, None]) @ bank.filters
    return ReconstructionResult(
        s_rec=coeffs @ basis,
        eigenvalues=lam,
        kept=int(np.count_nonzero(keep)),
        coefficients=coeffs,
        basis=basis,
    )


def fidelity_chi(chi_data: np.ndarray, chi_ref: np.ndarray) -> float:
    """Overlap of the L2-normalized chi curves (dot product of unit vectors)."""
    a = np.asarray(chi_data, dtype=float)
    b = np.asarray(chi_ref, dtype=float)
    if a.shape != b.shape:
        raise ValueError("chi vectors must have equal length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cannot normalize a zero chi vector")
    return float(a @ b / (na * nb))


def fidelity_spectrum(
    s_rec: np.ndarray,
    s_orig: np.ndarray,
    omega_grid: np.ndarray,
    clamp_negative: bool = False,
) -> float:
    """Trapezoid overlap of the two spectra after L2 normalization on the grid.

    ``clamp_negative`` zeroes negative reconstruction values (side-lobe
    artifacts of the truncated basis) before normalizing.
    """
    a = np.asarray(s_rec, dtype=float)
    b = np.asarray(s_orig, dtype=float)
    grid = np.asarray(omega_grid, dtype=float)
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ValueError("spectra and grid must share one common shape")
    if clamp_negative:
        a = np.maximum(a, 0.0)
    na = np.sqrt(np.trapezoid(a * a, grid))
    nb = np.sqrt(np.trapezoid(b * b, grid))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cannot normalize a zero spectrum")
    return float(np.trapezoid(a * b, grid) / (na * nb))


def tau_offset_correction(
    chi_data: np.ndarray,
    bank: FilterBank,
    offset: float,
) -> tuple[np.ndarray, FilterBank]:
    """Pair unchanged chi data with filters re-evaluated at tau_k + offset.

    Models the finite measurement-pulse duration: the probe effectively
    evolves for tau + offset between projections, so the filters (not the
    data) are recomputed at the shifted spacings.
    """
    if offset < 0.0:
        raise ValueError("offset must be >= 0")
    if offset >= np.min(bank.taus):
        raise ValueError(
            f"offset {offset} is not a small correction to the smallest tau "
            f"{np.min(bank.taus)}"
        )
    return np.asarray(chi_data, dtype=float), shift_bank(bank, offset)
