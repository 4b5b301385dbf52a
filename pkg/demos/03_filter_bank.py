"""The filter bank: spectral windows of the tau grid and their overlap matrix.

Each projection spacing tau_k turns the square-wave control into a band-pass
filter centered near 1/(2 tau_k).  Neighboring filters overlap strongly, so
the overlap matrix A is ill-conditioned; its eigenvalue spectrum (plotted on
a log scale) is what the reconstruction truncates.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zenospec import build_filter_bank, symmetric_eigendecomposition

TWO_PI = 2 * np.pi

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

taus = np.linspace(1.5e-6, 4.5e-6, 15)
grid = np.linspace(TWO_PI * 100e3, TWO_PI * 300e3, 2001)
bank = build_filter_bank(taus, grid, TWO_PI * 43.3e3, 18)
lam, _ = symmetric_eigendecomposition(bank.overlap)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
for k in range(bank.n_filters):
    ax1.plot(grid / (TWO_PI * 1e3), bank.filters[k], lw=0.9)
ax1.set_xlabel("frequency (kHz)")
ax1.set_ylabel(r"$F_k(\omega)$")
ax1.set_title("filter functions, K = 15")

ax2.semilogy(np.arange(1, lam.size + 1), lam / lam[0], "ko-")
ax2.axhline(1e-3, color="tab:red", ls="--", label=r"$\epsilon = 10^{-3}$")
ax2.axhline(1e-2, color="tab:orange", ls="--", label=r"$\epsilon = 10^{-2}$")
ax2.set_xlabel("mode index")
ax2.set_ylabel(r"$\lambda_k / \lambda_1$")
ax2.set_title("overlap-matrix eigenvalues")
ax2.legend()
fig.tight_layout()
fig.savefig(OUT / "filter_bank.png", dpi=150)
print(f"wrote {OUT}/filter_bank.png")
print("eigenvalues / lambda_1:", np.array2string(lam / lam[0], precision=2))
