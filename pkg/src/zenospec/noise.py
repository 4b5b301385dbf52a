"""Analytic noise models and harmonic synthesis of stationary realizations.

Spectral convention (used consistently everywhere in the package): the
one-sided power spectral density S(omega) is the cosine pair of the
autocorrelation function,

    <X(t) X(t')> = integral_0^inf S(omega) cos(omega (t - t')) d omega,

so integral_0^inf S = <X^2> = rms_amplitude**2.  A realization is a finite
harmonic sum

    X(t) = sum_m a_m cos(omega_m t + phi_m),

with deterministic amplitudes a_m = sqrt(2 S(omega_m) d_omega) on a fixed
tone grid and i.i.d. uniform phases, which reproduces the model
autocorrelation in the ensemble mean and admits closed-form time integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

SINGLE_TONE = "single_tone"
GAUSSIAN = "gaussian_psd"
LORENTZIAN = "lorentzian_psd"

# FWHM of a Gaussian = 2*sqrt(2 ln 2) * sigma
_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class NoiseModel:
    """Analytic description of a stationary noise field.

    kind is one of ``single_tone``, ``gaussian_psd``, ``lorentzian_psd``.
    For the single tone: X(t) = amplitude * sin(frequency * t + phase), with
    ``phase=None`` meaning a fresh uniform random phase per realization.
    For the broadband kinds the line shape is centered at ``center`` with
    width ``sigma`` (Gaussian std) or ``fwhm`` (Lorentzian full width), and
    ``rms_amplitude`` sets the total power integral_0^inf S = rms_amplitude**2.
    All frequencies are angular (rad/s).
    """

    kind: str
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float | None = None
    center: float = 0.0
    sigma: float = 0.0
    fwhm: float = 0.0
    rms_amplitude: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == SINGLE_TONE:
            if self.frequency <= 0.0:
                raise ValueError("tone frequency must be positive")
            if self.amplitude < 0.0:
                raise ValueError("tone amplitude must be >= 0")
        elif self.kind == GAUSSIAN:
            if self.center <= 0.0 or self.sigma <= 0.0:
                raise ValueError("gaussian center and sigma must be positive")
            if self.rms_amplitude < 0.0:
                raise ValueError("rms_amplitude must be >= 0")
        elif self.kind == LORENTZIAN:
            if self.center <= 0.0 or self.fwhm <= 0.0:
                raise ValueError("lorentzian center and fwhm must be positive")
            if self.rms_amplitude < 0.0:
                raise ValueError("rms_amplitude must be >= 0")
        else:
            raise ValueError(f"unknown noise kind: {self.kind!r}")

    @classmethod
    def single_tone(
        cls, amplitude: float, frequency: float, phase: float | None = None
    ) -> "NoiseModel":
        return cls(kind=SINGLE_TONE, amplitude=amplitude, frequency=frequency, phase=phase)

    @classmethod
    def gaussian(cls, center: float, sigma: float, rms_amplitude: float) -> "NoiseModel":
        return cls(kind=GAUSSIAN, center=center, sigma=sigma, rms_amplitude=rms_amplitude)

    @classmethod
    def gaussian_from_fwhm(
        cls, center: float, fwhm: float, rms_amplitude: float
    ) -> "NoiseModel":
        return cls.gaussian(center, fwhm / _FWHM_PER_SIGMA, rms_amplitude)

    @classmethod
    def lorentzian(cls, center: float, fwhm: float, rms_amplitude: float) -> "NoiseModel":
        return cls(kind=LORENTZIAN, center=center, fwhm=fwhm, rms_amplitude=rms_amplitude)

    @property
    def variance(self) -> float:
        """Lag-zero autocorrelation <X^2>."""
        if self.kind == SINGLE_TONE:
            return 0.5 * self.amplitude**2
        return self.rms_amplitude**2


@dataclass(frozen=True)
class NoiseRealization:
    """One sampled trajectory X(t) = sum_m a_m cos(omega_m t + phi_m)."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self) -> None:
        f = np.ascontiguousarray(np.atleast_1d(self.frequencies), dtype=float)
        a = np.ascontiguousarray(np.atleast_1d(self.amplitudes), dtype=float)
        p = np.ascontiguousarray(np.atleast_1d(self.phases), dtype=float)
        if not (f.shape == a.shape == p.shape) or f.ndim != 1 or f.size < 1:
            raise ValueError("tone arrays must be equal-length 1-d and non-empty")
        if np.any(f <= 0.0):
            raise ValueError("tone frequencies must be positive")
        for name, arr in (("frequencies", f), ("amplitudes", a), ("phases", p)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def value(self, t) -> np.ndarray | float:
        """Evaluate X(t); t may be a scalar or an array."""
        t = np.asarray(t, dtype=float)
        out = np.cos(np.multiply.outer(t, self.frequencies) + self.phases) @ self.amplitudes
        return out if out.ndim else float(out)


def _gaussian_norm(center: float, sigma: float) -> float:
    """integral_0^inf exp(-(w-center)^2 / (2 sigma^2)) dw."""
    return sigma * math.sqrt(math.pi / 2.0) * (1.0 + math.erf(center / (sigma * math.sqrt(2.0))))


def _lorentzian_norm(center: float, hwhm: float) -> float:
    """integral_0^inf hwhm^2 / ((w-center)^2 + hwhm^2) dw."""
    return hwhm * (math.pi / 2.0 + math.atan(center / hwhm))


def psd_value(model: NoiseModel, omega) -> np.ndarray | float:
    """One-sided spectral density S(omega) of a broadband model.

    The normalization constant is fixed by integral_0^inf S = rms_amplitude**2.
    A single-tone model has a delta-line spectrum with no finite density;
    asking for it raises ValueError.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0):
        raise ValueError("omega must be >= 0")
    if model.kind == GAUSSIAN:
        c = model.rms_amplitude**2 / _gaussian_norm(model.center, model.sigma)
        out = c * np.exp(-((omega - model.center) ** 2) / (2.0 * model.sigma**2))
    elif model.kind == LORENTZIAN:
        h = 0.5 * model.fwhm
        c = model.rms_amplitude**2 / _lorentzian_norm(model.center, h)
        out = c * h**2 / ((omega - model.center) ** 2 + h**2)
    else:
        raise ValueError("single-tone model has a delta-line spectrum, not a density")
    return out if out.ndim else float(out)


def sample_realization(
    model: NoiseModel,
    m_tones: int,
    band: tuple[float, float] | None,
    rng_seed: int,
) -> NoiseRealization:
    """Draw one stationary realization, deterministic in ``rng_seed``.

    Broadband models are synthesized as ``m_tones`` cosines on the midpoints
    of a uniform grid over ``band`` = (omega_lo, omega_hi), with amplitudes
    a_m = sqrt(2 S(omega_m) d_omega) and i.i.d. uniform phases.  For a
    single-tone model the band and m_tones are ignored; sin(w t + phi) is
    stored as a cosine with phase phi - pi/2.
    """
    rng = np.random.default_rng(rng_seed)
    if model.kind == SINGLE_TONE:
        phi = rng.uniform(0.0, 2.0 * np.pi) if model.phase is None else model.phase
        return NoiseRealization(
            np.array([model.frequency]),
            np.array([model.amplitude]),
            np.array([phi - np.pi / 2.0]),
        )
    if band is None:
        raise ValueError("broadband models need a synthesis band")
    lo, hi = float(band[0]), float(band[1])
    if not lo < hi:
        raise ValueError(f"empty band: [{lo}, {hi}]")
    if m_tones < 1:
        raise ValueError("m_tones must be >= 1")
    d_omega = (hi - lo) / m_tones
    omegas = lo + (np.arange(m_tones) + 0.5) * d_omega
    amps = np.sqrt(2.0 * np.asarray(psd_value(model, omegas)) * d_omega)
    phases = rng.uniform(0.0, 2.0 * np.pi, m_tones)
    return NoiseRealization(omegas, amps, phases)


def noise_integral(r: NoiseRealization, t0: float, t1: float) -> float:
    """integral_t0^t1 X(t) dt in closed form (no quadrature)."""
    if t0 > t1:
        raise ValueError("need t0 <= t1")
    s1 = np.sin(r.frequencies * t1 + r.phases)
    s0 = np.sin(r.frequencies * t0 + r.phases)
    return float((r.amplitudes / r.frequencies) @ (s1 - s0))


def interval_integrals(r: NoiseRealization, n: int, tau: float, t0: float = 0.0) -> np.ndarray:
    """Closed-form integrals of X over the n consecutive intervals of width tau.

    Element j-1 is integral over [t0 + (j-1) tau, t0 + j tau]; equivalent to
    n calls of :func:`noise_integral` but vectorized over the boundaries.
    """
    t = t0 + np.arange(n + 1) * tau
    s = np.sin(np.multiply.outer(t, r.frequencies) + r.phases)
    return np.diff(s, axis=0) @ (r.amplitudes / r.frequencies)


def autocorrelation(model: NoiseModel, dt: float, rel_tol: float = 1e-8) -> float:
    """Ensemble autocorrelation <X(t) X(t+dt)> (even in dt).

    Single tone (phase averaged): (amplitude^2 / 2) cos(frequency dt).
    Broadband: integral_0^inf S(omega) cos(omega dt) d omega by adaptive
    quadrature (QUADPACK Fourier integral) aiming at relative tolerance
    ``rel_tol`` of the lag-zero value.
    """
    dt = abs(float(dt))
    if model.kind == SINGLE_TONE:
        return 0.5 * model.amplitude**2 * math.cos(model.frequency * dt)
    if model.rms_amplitude == 0.0:
        return 0.0
    if dt == 0.0:
        return model.variance  # normalization identity, exact
    val, _ = quad(
        lambda w: psd_value(model, w),
        0.0,
        np.inf,
        weight="cos",
        wvar=dt,
        epsabs=rel_tol * model.variance,
        limit=2000,
        limlst=200,
    )
    return float(val)
