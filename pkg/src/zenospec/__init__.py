"""Weak-quantum-Zeno noise spectroscopy on a two-level probe.

Simulates survival-probability statistics of a repeatedly projected
two-level system driven by a periodic control plus an unknown stationary
noise field, and reconstructs the noise power spectral density from the
variance of the log survival via filter-function orthogonalization.
"""

from .config import ConfigError, ResolvedConfig, load_config, resolve_config
from .dynamics import (
    SurvivalRecord,
    alphas,
    factorized_probabilities,
    survival_probability,
    unitary_oracle,
)
from .estimator import (
    ChiPoint,
    EigenConvergenceError,
    ReconstructionResult,
    TruncationError,
    chi_from_survivals,
    fidelity_chi,
    fidelity_spectrum,
    reconstruct_spectrum,
    symmetric_eigendecomposition,
    tau_offset_correction,
)
from .filters import (
    EffectiveControl,
    FilterBank,
    QuadratureError,
    build_filter_bank,
    chi_theory,
    effective_control,
    filter_function,
    overlap_matrix,
    shift_bank,
)
from .noise import (
    NoiseModel,
    NoiseRealization,
    autocorrelation,
    noise_integral,
    psd_value,
    sample_realization,
)
from .pipeline import derive_seed, run_experiment, simulate_survivals
from .protocol import (
    ControlWaveform,
    ProtocolConfig,
    TauGrid,
    make_tau_grid,
    square_wave_control,
)

__version__ = "0.1.0"

__all__ = [
    "ChiPoint",
    "ConfigError",
    "ControlWaveform",
    "EffectiveControl",
    "EigenConvergenceError",
    "FilterBank",
    "NoiseModel",
    "NoiseRealization",
    "ProtocolConfig",
    "QuadratureError",
    "ReconstructionResult",
    "ResolvedConfig",
    "SurvivalRecord",
    "TauGrid",
    "TruncationError",
    "alphas",
    "autocorrelation",
    "build_filter_bank",
    "chi_from_survivals",
    "chi_theory",
    "derive_seed",
    "effective_control",
    "factorized_probabilities",
    "fidelity_chi",
    "fidelity_spectrum",
    "filter_function",
    "load_config",
    "make_tau_grid",
    "noise_integral",
    "overlap_matrix",
    "psd_value",
    "reconstruct_spectrum",
    "resolve_config",
    "run_experiment",
    "sample_realization",
    "shift_bank",
    "simulate_survivals",
    "square_wave_control",
    "survival_probability",
    "symmetric_eigendecomposition",
    "tau_offset_correction",
    "unitary_oracle",
]
