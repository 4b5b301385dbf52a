"""Experiment orchestration: seeded sweeps over tau and the staged pipeline.

Stages communicate through plain CSV/JSON files in a run directory so each
can be re-run independently:

    simulate    -> survivals.csv, manifest.json
    chi         -> chi.csv
    reconstruct -> spectrum.csv, eigen.csv
    fidelity    -> fidelity.json
    (run = all) -> summary.json

Every (tau_k, q) repetition gets its own RNG seed derived statelessly from
the master seed, so results are reproducible bit-for-bit and independent of
worker scheduling.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import dynamics, estimator, filters
from .config import SINGLE_TONE, ResolvedConfig, config_echo
from .noise import psd_value, sample_realization
from .protocol import TWO_PI, square_wave_control

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

SURVIVALS_CSV = "survivals.csv"
CHI_CSV = "chi.csv"
SPECTRUM_CSV = "spectrum.csv"
EIGEN_CSV = "eigen.csv"
FIDELITY_JSON = "fidelity.json"
SUMMARY_JSON = "summary.json"
MANIFEST_JSON = "manifest.json"

WEAK_ZENO_ALPHA_BOUND = 1.0


class MissingStageError(FileNotFoundError):
    """An upstream stage's output file is required but absent."""


def _splitmix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, k: int, q: int) -> int:
    """Stateless 64-bit seed for repetition q at tau index k.

    Two rounds of splitmix64 avalanche over golden-ratio encodings of k and
    q; a pure function, so evaluation order (threads, processes) is
    irrelevant and distinct (k, q) collide only with ~2^-64 probability.
    """
    s = _splitmix64((master + _GOLDEN * (k + 1)) & _MASK64)
    return _splitmix64((s + _GOLDEN * (q + 1)) & _MASK64)


# ----------------------------------------------------------------- simulate

def _simulate_block(cfg: ResolvedConfig, k: int) -> tuple[list[dynamics.SurvivalRecord], int]:
    """All Q repetitions at tau_k; returns (records, weak-Zeno violation count)."""
    tau = float(cfg.tau_grid.taus[k])
    tau_sim = tau + cfg.tau_sim_offset
    control = square_wave_control(cfg.control_amplitude, cfg.n_measurements, tau_sim)
    records = []
    violations = 0
    for q in range(cfg.q_repetitions):
        seed = derive_seed(cfg.master_seed, k, q)
        realization = sample_realization(cfg.noise_model, cfg.m_tones, cfg.band, seed)
        alpha = dynamics.alphas(control, realization, cfg.n_measurements, tau_sim)
        violations += int(np.count_nonzero(np.abs(alpha) > WEAK_ZENO_ALPHA_BOUND))
        p = dynamics.survival_probability(alpha)
        p_c, p_n, p_cn = dynamics.factorized_probabilities(
            control, realization, cfg.n_measurements, tau_sim
        )
        records.append(
            dynamics.SurvivalRecord(
                tau=tau, realization_seed=seed, p=p, p_c=p_c, p_n=p_n, p_cn=p_cn
            )
        )
    return records, violations


def simulate_survivals(
    cfg: ResolvedConfig, workers: int = 1
) -> tuple[list[dynamics.SurvivalRecord], int]:
    """Run the full (tau_k, q) sweep; output ordering is (k, q) regardless of workers."""
    ks = range(len(cfg.tau_grid))
    if workers <= 1:
        blocks = [_simulate_block(cfg, k) for k in ks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_simulate_block, [cfg] * len(cfg.tau_grid), ks))
    records = [r for block, _ in blocks for r in block]
    violations = sum(v for _, v in blocks)
    if violations:
        warnings.warn(
            f"{violations} accumulated phases exceeded |alpha| = "
            f"{WEAK_ZENO_ALPHA_BOUND}; the weak-Zeno factorization is "
            "inaccurate for those repetitions",
            stacklevel=2,
        )
    return records, violations


# ------------------------------------------------------------------- files

def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    def fmt(x) -> str:
        return repr(float(x)) if isinstance(x, float) else str(x)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _read_csv(path: str, stage: str) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise MissingStageError(
            f"{path} not found: run the '{stage}' stage first"
        )
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise MissingStageError(f"{path} holds no data rows: rerun the '{stage}' stage")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def stage_simulate(cfg: ResolvedConfig, out_dir: str, workers: int = 1) -> None:
    os.makedirs(out_dir, exist_ok=True)
    records, violations = simulate_survivals(cfg, workers)
    rows = [
        [r.tau * 1e6, r.realization_seed, r.p, r.p_c, r.p_n, r.p_cn] for r in records
    ]
    _write_csv(
        os.path.join(out_dir, SURVIVALS_CSV),
        ["tau_us", "seed", "p", "p_c", "p_n", "p_cn"],
        rows,
    )
    seeds = [
        [derive_seed(cfg.master_seed, k, q) for q in range(cfg.q_repetitions)]
        for k in range(len(cfg.tau_grid))
    ]
    _write_json(
        os.path.join(out_dir, MANIFEST_JSON),
        {
            "config": config_echo(cfg),
            "master_seed": cfg.master_seed,
            "derived_seeds": seeds,
            "weak_zeno_violations": violations,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "outputs": [SURVIVALS_CSV, CHI_CSV, SPECTRUM_CSV, EIGEN_CSV,
                        FIDELITY_JSON, SUMMARY_JSON],
        },
    )


def _grouped_survivals(out_dir: str) -> dict[str, dict[str, np.ndarray]]:
    """survivals.csv rows grouped by tau (insertion order = k order)."""
    header, rows = _read_csv(os.path.join(out_dir, SURVIVALS_CSV), "simulate")
    idx = {name: i for i, name in enumerate(header)}
    groups: dict[str, list[list[str]]] = {}
    for row in rows:
        groups.setdefault(row[idx["tau_us"]], []).append(row)
    out = {}
    for tau_key, grp in groups.items():
        out[tau_key] = {
            name: np.array([float(r[idx[name]]) for r in grp])
            for name in ("p", "p_c", "p_n", "p_cn")
        }
    return out


def stage_chi(cfg: ResolvedConfig, out_dir: str) -> None:
    """Per-tau chi estimates plus the theoretical overlap curve."""
    groups = _grouped_survivals(out_dir)
    omega_cut = cfg.omega_max
    rows = []
    for tau_key, cols in groups.items():
        tau = float(tau_key) * 1e-6
        if cfg.chi_source == "survival":
            point = estimator.chi_from_survivals(cols["p"], float(cols["p_c"][0]))
        else:
            point = estimator.chi_from_survivals(cols["p_cn"], 1.0)
        ec = filters.effective_control(
            square_wave_control(cfg.control_amplitude, cfg.n_measurements, tau)
        )
        theory = filters.chi_theory(cfg.noise_model, ec, omega_cut)
        rows.append([float(tau_key), point.chi, point.std_error, theory])
    _write_csv(
        os.path.join(out_dir, CHI_CSV),
        ["tau_us", "chi", "std_error", "chi_theory"],
        rows,
    )


def _read_chi(out_dir: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    header, rows = _read_csv(os.path.join(out_dir, CHI_CSV), "chi")
    idx = {name: i for i, name in enumerate(header)}
    taus = np.array([float(r[idx["tau_us"]]) for r in rows]) * 1e-6
    chi = np.array([float(r[idx["chi"]]) for r in rows])
    theory = np.array([float(r[idx["chi_theory"]]) for r in rows])
    return taus, chi, theory


def stage_reconstruct(cfg: ResolvedConfig, out_dir: str) -> estimator.ReconstructionResult:
    taus, chi, _ = _read_chi(out_dir)
    grid = cfg.omega_grid
    bank = filters.build_filter_bank(taus, grid, cfg.control_amplitude, cfg.n_measurements)
    if cfg.tau_offset > 0.0:
        chi, bank = estimator.tau_offset_correction(chi, bank, cfg.tau_offset)
    result = estimator.reconstruct_spectrum(chi, bank, cfg.epsilon)
    if cfg.noise_model.kind == SINGLE_TONE:
        s_orig = np.zeros_like(grid)
    else:
        s_orig = np.asarray(psd_value(cfg.noise_model, grid))
    _write_csv(
        os.path.join(out_dir, SPECTRUM_CSV),
        ["omega_khz", "s_rec", "s_orig"],
        [[w / (TWO_PI * 1e3), sr, so] for w, sr, so in zip(grid, result.s_rec, s_orig)],
    )
    _write_csv(
        os.path.join(out_dir, EIGEN_CSV),
        ["k", "lambda"],
        [[k + 1, lam] for k, lam in enumerate(result.eigenvalues)],
    )
    return result


def _read_spectrum(out_dir: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    header, rows = _read_csv(os.path.join(out_dir, SPECTRUM_CSV), "reconstruct")
    idx = {name: i for i, name in enumerate(header)}
    grid = np.array([float(r[idx["omega_khz"]]) for r in rows]) * TWO_PI * 1e3
    s_rec = np.array([float(r[idx["s_rec"]]) for r in rows])
    s_orig = np.array([float(r[idx["s_orig"]]) for r in rows])
    return grid, s_rec, s_orig


def stage_fidelity(
    cfg: ResolvedConfig, out_dir: str, against: ResolvedConfig | None = None
) -> dict:
    """Fidelities of the run's chi curve and spectrum against an original.

    ``against`` substitutes another config's noise model as the comparison
    original (cross-spectrum discrimination); by default the run's own model
    is used.
    """
    _, chi, theory = _read_chi(out_dir)
    grid, s_rec, _ = _read_spectrum(out_dir)
    ref_cfg = against if against is not None else cfg
    doc: dict = {"against_kind": ref_cfg.noise_model.kind}
    if against is not None:
        taus = cfg.tau_grid.taus
        theory = np.array(
            [
                filters.chi_theory(
                    ref_cfg.noise_model,
                    filters.effective_control(
                        square_wave_control(cfg.control_amplitude, cfg.n_measurements, t)
                    ),
                    cfg.omega_max,
                )
                for t in taus
            ]
        )
    doc["fidelity_chi"] = estimator.fidelity_chi(chi, theory)
    if ref_cfg.noise_model.kind == SINGLE_TONE:
        doc["fidelity_spectrum"] = None
    else:
        s_ref = np.asarray(psd_value(ref_cfg.noise_model, grid))
        doc["fidelity_spectrum"] = estimator.fidelity_spectrum(
            s_rec, s_ref, grid, clamp_negative=cfg.clamp_negative
        )
    _write_json(os.path.join(out_dir, FIDELITY_JSON), doc)
    return doc


def stage_summary(cfg: ResolvedConfig, out_dir: str) -> dict:
    groups = _grouped_survivals(out_dir)
    _, chi, theory = _read_chi(out_dir)
    header, eig_rows = _read_csv(os.path.join(out_dir, EIGEN_CSV), "reconstruct")
    eigenvalues = [float(r[1]) for r in eig_rows]
    lam_max = max(eigenvalues)
    kept = sum(1 for lam in eigenvalues if lam > 0 and lam >= cfg.epsilon * lam_max)
    with open(os.path.join(out_dir, FIDELITY_JSON), "r", encoding="utf-8") as fh:
        fidelity = json.load(fh)
    with open(os.path.join(out_dir, MANIFEST_JSON), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    per_tau = [
        {
            "tau_us": float(tau_key),
            "mean_p": float(np.mean(cols["p"])),
            "p_c": float(cols["p_c"][0]),
            "chi": chi[i],
            "chi_theory": theory[i],
        }
        for i, (tau_key, cols) in enumerate(groups.items())
    ]
    doc = {
        "parameters": config_echo(cfg),
        "fidelity_chi": fidelity.get("fidelity_chi"),
        "fidelity_spectrum": fidelity.get("fidelity_spectrum"),
        "kept_modes": kept,
        "weak_zeno_violations": manifest.get("weak_zeno_violations", 0),
        "per_tau": per_tau,
    }
    _write_json(os.path.join(out_dir, SUMMARY_JSON), doc)
    return doc


def stage_theory(cfg: ResolvedConfig, out_dir: str) -> None:
    """Theory-only outputs: chi_theory curve, filter bank, and overlap matrix."""
    os.makedirs(out_dir, exist_ok=True)
    grid = cfg.omega_grid
    taus = cfg.tau_grid.taus
    bank = filters.build_filter_bank(taus, grid, cfg.control_amplitude, cfg.n_measurements)
    theory = [
        filters.chi_theory(
            cfg.noise_model,
            filters.effective_control(
                square_wave_control(cfg.control_amplitude, cfg.n_measurements, t)
            ),
            cfg.omega_max,
        )
        for t in taus
    ]
    _write_csv(
        os.path.join(out_dir, "chi_theory.csv"),
        ["tau_us", "chi_theory"],
        [[t * 1e6, c] for t, c in zip(taus, theory)],
    )
    _write_csv(
        os.path.join(out_dir, "filters.csv"),
        ["omega_khz"] + [f"F_{k + 1}" for k in range(bank.n_filters)],
        [
            [w / (TWO_PI * 1e3)] + list(bank.filters[:, i])
            for i, w in enumerate(grid)
        ],
    )
    _write_csv(
        os.path.join(out_dir, "overlap.csv"),
        [f"A_{k + 1}" for k in range(bank.n_filters)],
        [list(row) for row in bank.overlap],
    )


def run_experiment(cfg: ResolvedConfig, out_dir: str, workers: int = 1) -> dict:
    """Full chain: simulate -> chi -> reconstruct -> fidelity -> summary."""
    stage_simulate(cfg, out_dir, workers)
    stage_chi(cfg, out_dir)
    stage_reconstruct(cfg, out_dir)
    stage_fidelity(cfg, out_dir)
    return stage_summary(cfg, out_dir)
