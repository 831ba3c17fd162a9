"""Why do the two waveguides only interfere well with filters or a cw pump?

Both waveguides must emit the same two-photon spectrum. First we compare their
SHG phase-matching curves. Then we build the joint spectral amplitude (JSA) for
a 0.3 nm pulsed pump and for a cw pump, and measure how symmetric each one is
under signal/idler exchange.
"""

import numpy as np

from entsource import FilterSpec, GridSpec, PhaseMatchingSpec, PumpConfig, build_jsa, exchange_overlap
from entsource.spectral import apply_filter, curve_overlap, principal_axis_angle, schmidt_number, shg_curve

from _plotting import plt, save

wg1 = PhaseMatchingSpec(fwhm=0.306)
wg2 = PhaseMatchingSpec(fwhm=0.359)

axis = np.linspace(1554.44 - 6, 1554.44 + 6, 20001)
c1, c2 = shg_curve(wg1, axis), shg_curve(wg2, axis)
print(f"SHG fits: {c1.fitted_fwhm:.3f} nm and {c2.fitted_fwhm:.3f} nm, "
      f"amplitude overlap {curve_overlap(c1, c2):.4f}")

pulsed = PumpConfig(bandwidth_fwhm=0.3, regime="pulsed")
cw = PumpConfig()
grid = GridSpec(points=1024)
# the JSA uses a waveguide with the mean of the two measured bandwidths
mean_wg = PhaseMatchingSpec(fwhm=(wg1.fwhm + wg2.fwhm) / 2)

jsa_pulsed = build_jsa(mean_wg, pulsed, grid)
jsa_cw = build_jsa(mean_wg, cw, grid)
filtered, transmission = apply_filter(jsa_pulsed, FilterSpec(), FilterSpec())

print("\nExchange overlap (1 means the two photons are spectrally indistinguishable)")
for name, jsa in (("pulsed", jsa_pulsed), ("pulsed + 0.25 nm filters", filtered), ("cw", jsa_cw)):
    print(f"  {name:26s} {exchange_overlap(jsa):.4f}   "
          f"principal axis {principal_axis_angle(jsa):7.2f} deg   Schmidt K {schmidt_number(jsa):6.2f}")
print(f"\nThe filters keep {transmission:.1%} of the pulsed pair flux.")

if plt is not None:
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    axes[0].plot(axis - 1554.44, c1.intensity / c1.intensity.max(), label="wg1")
    axes[0].plot(axis - 1554.44, c2.intensity / c2.intensity.max(), label="wg2")
    axes[0].set(xlim=(-1.5, 1.5), xlabel="detuning (nm)", title="SHG curves")
    axes[0].legend()
    for ax, jsa, title in ((axes[1], jsa_pulsed, "pulsed JSA"), (axes[2], jsa_cw, "cw JSA")):
        d = jsa.signal_axis - 1554.44
        ax.pcolormesh(d, d, jsa.intensity().T, shading="auto")
        ax.set(xlim=(-1, 1), ylim=(-1, 1), xlabel="signal (nm)", ylabel="idler (nm)", title=title)
        ax.set_aspect("equal")
    save(fig, "spectra.png")
