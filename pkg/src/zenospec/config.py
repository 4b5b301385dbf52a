"""JSON configuration: ordinary-kHz / microsecond keys resolved to SI units.

Configuration files speak the units of the lab notebook (kHz of ordinary
frequency, microseconds); everything downstream of the loader is rad/s and
seconds.  The loader multiplies frequencies by 2 pi 10^3 exactly once, here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .noise import GAUSSIAN, LORENTZIAN, SINGLE_TONE, NoiseModel
from .protocol import TauGrid, make_tau_grid

KHZ = 2.0 * math.pi * 1e3
US = 1e-6

CHI_SOURCES = ("survival", "cross")


class ConfigError(ValueError):
    """Configuration file cannot be parsed or validated."""


@dataclass(frozen=True)
class ResolvedConfig:
    """All run parameters in SI units (seconds, rad/s)."""

    n_measurements: int
    tau_grid: TauGrid
    q_repetitions: int
    control_amplitude: float
    measurement_duration: float
    master_seed: int
    extend_tau_by_measurement: bool
    noise_model: NoiseModel
    m_tones: int
    band: tuple[float, float]
    omega_min: float
    omega_max: float
    grid_points: int
    epsilon: float
    clamp_negative: bool
    tau_offset: float
    chi_source: str

    @property
    def omega_grid(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.grid_points)

    @property
    def tau_sim_offset(self) -> float:
        """Extra evolution time per interval used when simulating finite pulses."""
        return 0.5 * self.measurement_duration if self.extend_tau_by_measurement else 0.0


_PROTOCOL_KEYS = {
    "n_measurements",
    "tau_min_us",
    "tau_max_us",
    "k_taus",
    "taus_us",
    "q_repetitions",
    "control_amplitude_khz",
    "measurement_duration_us",
    "master_seed",
    "extend_tau_by_measurement",
}
_NOISE_KEYS = {
    "kind",
    "amplitude_khz",
    "frequency_khz",
    "center_khz",
    "sigma_khz",
    "fwhm_khz",
    "rms_amplitude_khz",
    "m_tones",
    "band_khz",
    "phase",
}
_GRID_KEYS = {"min_khz", "max_khz", "points"}
_RECON_KEYS = {"epsilon", "clamp_negative", "tau_offset_us", "chi_source"}
_SECTIONS = {"protocol", "noise", "grid", "reconstruction"}


def _check_keys(section: str, given: dict, allowed: set) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in section '{section}': {sorted(unknown)}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def resolve_config(doc: dict) -> ResolvedConfig:
    """Validate a parsed JSON document and convert it to SI units."""
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown top-level section(s): {sorted(unknown)}")
    proto = doc.get("protocol", {})
    noise = doc.get("noise", {})
    grid = doc.get("grid", {})
    recon = doc.get("reconstruction", {})
    _check_keys("protocol", proto, _PROTOCOL_KEYS)
    _check_keys("noise", noise, _NOISE_KEYS)
    _check_keys("grid", grid, _GRID_KEYS)
    _check_keys("reconstruction", recon, _RECON_KEYS)

    n = int(proto.get("n_measurements", 18))
    q = int(proto.get("q_repetitions", 14))
    amp = float(proto.get("control_amplitude_khz", 43.3)) * KHZ
    tau_m = float(proto.get("measurement_duration_us", 0.6)) * US
    seed = int(proto.get("master_seed", 0))
    _require(n >= 1, "protocol.n_measurements must be >= 1")
    _require(q >= 2, "protocol.q_repetitions must be >= 2 (chi needs a variance)")
    _require(amp >= 0.0, "protocol.control_amplitude_khz must be >= 0")
    _require(tau_m >= 0.0, "protocol.measurement_duration_us must be >= 0")
    _require(seed >= 0, "protocol.master_seed must be a non-negative integer")

    try:
        if "taus_us" in proto:
            taus = TauGrid(np.asarray(proto["taus_us"], dtype=float) * US)
        else:
            taus = make_tau_grid(
                float(proto.get("tau_min_us", 1.5)) * US,
                float(proto.get("tau_max_us", 4.5)) * US,
                int(proto.get("k_taus", 15)),
            )
    except ValueError as exc:
        raise ConfigError(f"protocol tau grid: {exc}") from exc
    _require(
        float(taus.taus[0]) > tau_m,
        "protocol: tau_min must exceed measurement_duration_us",
    )

    kind = noise.get("kind", SINGLE_TONE)
    try:
        if kind == SINGLE_TONE:
            freq_khz = noise.get("frequency_khz", noise.get("center_khz", 167.0))
            amp_khz = noise.get("amplitude_khz")
            if amp_khz is None:
                rms = noise.get("rms_amplitude_khz")
                amp_khz = math.sqrt(2.0) * float(rms) if rms is not None else 12.0
            phase = noise.get("phase", "random")
            model = NoiseModel.single_tone(
                amplitude=float(amp_khz) * KHZ,
                frequency=float(freq_khz) * KHZ,
                phase=None if phase == "random" else float(phase),
            )
        elif kind in (GAUSSIAN, LORENTZIAN):
            center = float(noise.get("center_khz", 167.0)) * KHZ
            rms = float(noise.get("rms_amplitude_khz", 12.0)) * KHZ
            if kind == GAUSSIAN:
                if "sigma_khz" in noise:
                    model = NoiseModel.gaussian(center, float(noise["sigma_khz"]) * KHZ, rms)
                else:
                    model = NoiseModel.gaussian_from_fwhm(
                        center, float(noise.get("fwhm_khz", 50.0)) * KHZ, rms
                    )
            else:
                model = NoiseModel.lorentzian(
                    center, float(noise.get("fwhm_khz", 50.0)) * KHZ, rms
                )
        else:
            raise ConfigError(f"noise.kind must be one of {SINGLE_TONE!r}, "
                              f"{GAUSSIAN!r}, {LORENTZIAN!r}; got {kind!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"noise section: {exc}") from exc

    m_tones = int(noise.get("m_tones", 400))
    band_khz = noise.get("band_khz", [100.0, 300.0])
    _require(
        isinstance(band_khz, (list, tuple)) and len(band_khz) == 2,
        "noise.band_khz must be a [lo, hi] pair",
    )
    band = (float(band_khz[0]) * KHZ, float(band_khz[1]) * KHZ)
    _require(band[0] > 0 and band[0] < band[1], "noise.band_khz must satisfy 0 < lo < hi")
    _require(m_tones >= 1, "noise.m_tones must be >= 1")

    omega_min = float(grid.get("min_khz", 100.0)) * KHZ
    omega_max = float(grid.get("max_khz", 300.0)) * KHZ
    points = int(grid.get("points", 2001))
    _require(0 < omega_min < omega_max, "grid: need 0 < min_khz < max_khz")
    _require(points >= 2, "grid.points must be >= 2")

    eps = float(recon.get("epsilon", 1e-3))
    clamp = bool(recon.get("clamp_negative", False))
    tau_offset = float(recon.get("tau_offset_us", 0.0)) * US
    chi_source = recon.get("chi_source", "cross")
    _require(eps >= 0.0, "reconstruction.epsilon must be >= 0")
    _require(tau_offset >= 0.0, "reconstruction.tau_offset_us must be >= 0")
    _require(
        chi_source in CHI_SOURCES,
        f"reconstruction.chi_source must be one of {CHI_SOURCES}",
    )

    return ResolvedConfig(
        n_measurements=n,
        tau_grid=taus,
        q_repetitions=q,
        control_amplitude=amp,
        measurement_duration=tau_m,
        master_seed=seed,
        extend_tau_by_measurement=bool(proto.get("extend_tau_by_measurement", False)),
        noise_model=model,
        m_tones=m_tones,
        band=band,
        omega_min=omega_min,
        omega_max=omega_max,
        grid_points=points,
        epsilon=eps,
        clamp_negative=clamp,
        tau_offset=tau_offset,
        chi_source=chi_source,
    )


def load_config(path: str) -> ResolvedConfig:
    """Read and resolve a JSON config file; parse errors keep line/column info."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return resolve_config(doc)


def config_echo(cfg: ResolvedConfig) -> dict:
    """SI-unit echo of every resolved parameter (for manifests and summaries)."""
    model = cfg.noise_model
    noise: dict = {"kind": model.kind}
    if model.kind == SINGLE_TONE:
        noise.update(
            amplitude_rad_s=model.amplitude,
            frequency_rad_s=model.frequency,
            phase="random" if model.phase is None else model.phase,
        )
    else:
        noise.update(center_rad_s=model.center, rms_amplitude_rad_s=model.rms_amplitude)
        if model.kind == GAUSSIAN:
            noise["sigma_rad_s"] = model.sigma
        else:
            noise["fwhm_rad_s"] = model.fwhm
        noise.update(m_tones=cfg.m_tones, band_rad_s=list(cfg.band))
    return {
        "n_measurements": cfg.n_measurements,
        "taus_s": [float(t) for t in cfg.tau_grid.taus],
        "q_repetitions": cfg.q_repetitions,
        "control_amplitude_rad_s": cfg.control_amplitude,
        "measurement_duration_s": cfg.measurement_duration,
        "master_seed": cfg.master_seed,
        "extend_tau_by_measurement": cfg.extend_tau_by_measurement,
        "noise": noise,
        "omega_grid_rad_s": [cfg.omega_min, cfg.omega_max, cfg.grid_points],
        "epsilon": cfg.epsilon,
        "clamp_negative": cfg.clamp_negative,
        "tau_offset_s": cfg.tau_offset,
        "chi_source": cfg.chi_source,
    }
