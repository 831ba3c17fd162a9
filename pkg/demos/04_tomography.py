"""Reconstructing the state from simulated coincidence counts.

We take a Werner state with 97.3% singlet fidelity and simulate Poisson counts
for the 16 standard analyzer settings. Then we compare linear inversion with
the maximum-likelihood estimate, and finally run a parametric bootstrap for the
error bars.
"""

import math

import numpy as np

from entsource import fidelity, simulate_counts, tomography_linear, tomography_mle
from entsource.states import bell_state, chsh_fixed, chsh_optimal, werner_state
from entsource.tomography import error_bars, log_likelihood, tomography_settings

from _plotting import plt, save

truth = werner_state(0.964)
singlet = bell_state("psi-")
settings = tomography_settings("16")
print(f"true state: F = {fidelity(truth, singlet):.4f}, S_opt = {chsh_optimal(truth):.4f}")

for total in (1e3, 1e4, 1e5):
    records = simulate_counts(truth, settings, total, seed=[1, int(math.log10(total))])
    _, raw = tomography_linear(records, return_raw=True)
    lin = tomography_linear(records)
    mle = tomography_mle(records)
    print(f"\n{total:8.0f} counts per basis pair")
    print(f"  raw inversion, smallest eigenvalue {np.linalg.eigvalsh(raw).min():+.4f}")
    print(f"  linear: F = {fidelity(lin, singlet):.4f}  logL = {log_likelihood(lin, records):.2f}")
    print(f"  MLE   : F = {fidelity(mle.rho, singlet):.4f}  logL = {mle.log_likelihood:.2f}"
          f"  ({mle.iterations} iterations)")

records = simulate_counts(truth, settings, 1e5, seed=2024)
bars = error_bars(records, "mle", n_bootstrap=100, seed=7)
rho = tomography_mle(records).rho
print(f"\nMLE at 1e5 counts: F = {fidelity(rho, singlet):.4f} +- {bars.fidelity_std:.4f}, "
      f"S = {chsh_fixed(rho):.3f} +- {bars.chsh_std:.3f}")

if plt is not None:
    labels = ["HH", "HV", "VH", "VV"]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    for ax, part, title in ((axes[0], rho.elements.real, "Re rho"), (axes[1], rho.elements.imag, "Im rho")):
        im = ax.imshow(part, vmin=-0.5, vmax=0.5, cmap="RdBu")
        ax.set(xticks=range(4), yticks=range(4), xticklabels=labels, yticklabels=labels, title=title)
    fig.colorbar(im, ax=axes)
    save(fig, "tomography.png")
