"""Shared constants and helpers for the test suite.

Reference parameter set used throughout: N = 18 projections, square-wave
control amplitude 2 pi x 43.3 kHz, tau in [1.5, 4.5] us, single-tone probe
noise 2 pi x 12 kHz at 2 pi x 167 kHz, broadband line shapes centered at
167 kHz with 50 kHz full width, reconstruction window 100..300 kHz.
"""

import math

import numpy as np
import pytest

from zenospec import NoiseModel, NoiseRealization

TWO_PI = 2.0 * math.pi

OMEGA0 = TWO_PI * 43.3e3          # control amplitude, rad/s
OMEGA_N = TWO_PI * 167e3          # tone / line-center frequency, rad/s
OMEGA_N0 = TWO_PI * 12e3          # tone amplitude, rad/s
N_MEAS = 18
FWHM = TWO_PI * 50e3              # full width of both broadband lines
RMS = TWO_PI * 12e3               # broadband rms amplitude
BAND = (TWO_PI * 100e3, TWO_PI * 300e3)
M_TONES = 400
TAU_MIN, TAU_MAX = 1.5e-6, 4.5e-6


def gaussian_model(rms: float = RMS) -> NoiseModel:
    return NoiseModel.gaussian_from_fwhm(OMEGA_N, FWHM, rms)


def lorentzian_model(rms: float = RMS) -> NoiseModel:
    return NoiseModel.lorentzian(OMEGA_N, FWHM, rms)


def zero_noise() -> NoiseRealization:
    """A realization that is identically zero (one silent tone)."""
    return NoiseRealization(np.array([1.0]), np.array([0.0]), np.array([0.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(20231115)
