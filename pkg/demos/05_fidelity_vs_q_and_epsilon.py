"""How reconstruction fidelity depends on the statistics Q and truncation eps.

The chi estimate at each tau carries a relative sampling error of
sqrt(2/(Q-1)) regardless of the noise amplitude; the orthonormal-basis
expansion amplifies that error by 1/sqrt(lambda_k) on each kept mode.  The
two knobs therefore trade off: more modes lower the truncation bias but
amplify noise.  This script maps the landscape (a handful of repeats per
point; expect a minute of runtime).
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zenospec import (
    NoiseModel,
    build_filter_bank,
    chi_from_survivals,
    derive_seed,
    factorized_probabilities,
    fidelity_spectrum,
    psd_value,
    reconstruct_spectrum,
    sample_realization,
    square_wave_control,
)
from zenospec.filters import trapezoid_weights

TWO_PI = 2 * np.pi
OMEGA0 = TWO_PI * 43.3e3
N = 18
BAND = (TWO_PI * 100e3, TWO_PI * 300e3)
REPEATS = 8
Q_MAX = 200

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

taus = np.linspace(1.5e-6, 4.5e-6, 15)
grid = np.linspace(*BAND, 2001)
bank = build_filter_bank(taus, grid, OMEGA0, N)
model = NoiseModel.gaussian_from_fwhm(TWO_PI * 167e3, TWO_PI * 50e3, TWO_PI * 12e3)
s_orig = np.asarray(psd_value(model, grid))

# one Q_MAX sweep per repeat; smaller Q values reuse its leading repetitions
sweeps = []
for rep in range(REPEATS):
    p_cn = np.empty((taus.size, Q_MAX))
    for k, tau in enumerate(taus):
        ctrl = square_wave_control(OMEGA0, N, tau)
        for q in range(Q_MAX):
            r = sample_realization(model, 400, BAND, derive_seed(42_000 + rep, k, q))
            p_cn[k, q] = factorized_probabilities(ctrl, r, N, tau)[2]
    sweeps.append(p_cn)


def fidelities(q: int, eps: float) -> np.ndarray:
    out = []
    for p_cn in sweeps:
        chi = np.array(
            [chi_from_survivals(p_cn[k, :q], 1.0).chi for k in range(taus.size)]
        )
        rec = reconstruct_spectrum(chi, bank, eps)
        out.append(fidelity_spectrum(rec.s_rec, s_orig, grid))
    return np.array(out)


fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))

qs = [14, 50, 100, 200]
for eps, color in ((1e-3, "tab:blue"), (1e-2, "tab:orange")):
    med = [np.median(fidelities(q, eps)) for q in qs]
    ax1.plot(qs, med, "o-", color=color, label=f"eps = {eps:g}")
ax1.set_xlabel("repetitions Q")
ax1.set_ylabel("median fidelity (Gaussian)")
ax1.set_title("fidelity vs statistics")
ax1.legend()

eps_grid = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 2e-2, 3e-2, 5e-2, 1e-1]
for q, color in ((100, "tab:green"), (200, "tab:red")):
    med = [np.median(fidelities(q, e)) for e in eps_grid]
    ax2.semilogx(eps_grid, med, "o-", color=color, label=f"Q = {q}")
# noise-free ceiling: analytic chi through the same quadrature as the bank
w = trapezoid_weights(grid)
chi_exact = (bank.filters * w) @ s_orig
ceiling = [
    fidelity_spectrum(reconstruct_spectrum(chi_exact, bank, e).s_rec, s_orig, grid)
    for e in eps_grid
]
ax2.semilogx(eps_grid, ceiling, "k--", label="noise-free ceiling")
ax2.set_xlabel("truncation threshold eps")
ax2.set_title("fidelity vs truncation")
ax2.legend()
fig.tight_layout()
fig.savefig(OUT / "fidelity_vs_q_and_epsilon.png", dpi=150)
print(f"wrote {OUT}/fidelity_vs_q_and_epsilon.png")
