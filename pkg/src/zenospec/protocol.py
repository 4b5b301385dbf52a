"""Protocol parameters, measurement-time grids, and the periodic control field.

Unit conventions for the whole package are fixed here: times are in seconds
and all frequencies are angular (rad/s).  The command-line layer converts
from the ordinary-frequency kHz / microsecond units used in configuration
files; nothing below that layer ever multiplies by 2*pi.

Index convention: evolution intervals are j = 1..N, with the j-th projective
measurement applied at t = j*tau.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ProtocolConfig:
    """Knobs of one sensing run: N projections spaced tau, repeated Q times.

    ``control_amplitude`` is the square-wave amplitude Omega_0 in rad/s;
    ``measurement_duration`` is the duration of the projective light pulse
    (may be zero for an idealized instantaneous projector).
    """

    n_measurements: int
    tau: float
    repetitions: int
    control_amplitude: float
    measurement_duration: float = 0.0
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_measurements < 1:
            raise ValueError("n_measurements must be >= 1")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.control_amplitude < 0.0:
            raise ValueError("control_amplitude must be >= 0")
        if self.measurement_duration < 0.0:
            raise ValueError("measurement_duration must be >= 0")
        if self.tau <= self.measurement_duration:
            raise ValueError("tau must exceed the measurement duration")


@dataclass(frozen=True)
class TauGrid:
    """Strictly increasing inter-measurement times tau_k (seconds)."""

    taus: np.ndarray

    def __post_init__(self) -> None:
        taus = _readonly(np.atleast_1d(self.taus))
        if taus.ndim != 1 or taus.size < 1:
            raise ValueError("tau grid must be a non-empty 1-d sequence")
        if np.any(taus <= 0.0):
            raise ValueError("all taus must be positive")
        if np.any(np.diff(taus) <= 0.0):
            raise ValueError("taus must be strictly increasing")
        object.__setattr__(self, "taus", taus)

    def __len__(self) -> int:
        return int(self.taus.size)


@dataclass(frozen=True)
class ControlWaveform:
    """Piecewise-constant control Omega_c(t): value j holds on interval j.

    ``interval_values[j-1]`` is the (constant) rad/s value of the control on
    [(j-1)*tau, j*tau).
    """

    interval_values: np.ndarray
    tau: float

    def __post_init__(self) -> None:
        values = _readonly(np.atleast_1d(self.interval_values))
        if values.ndim != 1 or values.size < 1:
            raise ValueError("control waveform needs at least one interval")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "interval_values", values)

    @property
    def n_intervals(self) -> int:
        return int(self.interval_values.size)

    @property
    def total_time(self) -> float:
        return self.n_intervals * self.tau


def make_tau_grid(tau_min: float, tau_max: float, k: int) -> TauGrid:
    """Uniform grid of k measurement spacings with endpoints tau_min, tau_max.

    Raises ValueError for a degenerate range (tau_min <= 0 or
    tau_min >= tau_max) or for k < 2.
    """
    if tau_min <= 0.0 or tau_min >= tau_max:
        raise ValueError(
            f"invalid tau range: need 0 < tau_min < tau_max, got [{tau_min}, {tau_max}]"
        )
    if k < 2:
        raise ValueError("k must be >= 2")
    return TauGrid(np.linspace(tau_min, tau_max, k))


def square_wave_control(omega0: float, n: int, tau: float) -> ControlWaveform:
    """Zero-average square wave of period 2*tau: value (-1)^j * omega0 on interval j.

    The first interval (j = 1) carries -omega0.  For even n the waveform
    integrates to zero over the full sequence.
    """
    if omega0 < 0.0:
        raise ValueError("omega0 must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    j = np.arange(1, n + 1)
    return ControlWaveform(((-1.0) ** j) * omega0, tau)
