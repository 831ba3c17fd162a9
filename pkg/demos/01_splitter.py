"""How far can the on-chip splitter drift before the singlet degrades?

The source only emits a clean singlet when the coupler passes H and swaps V.
We start from the measured coupler (t_h = 0.996, t_v = 0.032), then scan the
whole quadrant of imperfect couplers for both pump phases.
"""

import math

import numpy as np

from entsource import PumpConfig, SplitterParams, bell_projection_probability, output_state
from entsource.polarization import postselect_coincidence, probability_surface

from _plotting import plt, save

measured = SplitterParams(t_h=0.996, t_v=0.032)

print("Measured coupler")
for phase, target, sign in ((0.0, "psi-", -1), (math.pi, "psi+", 1)):
    state = output_state(PumpConfig(phase=phase), measured)
    p = bell_projection_probability(state, target)
    # the postselected qubit lives on (H_A V_B, V_A H_B)
    qubit = postselect_coincidence(state).qubit_state
    fid = abs(qubit[0] + sign * qubit[1]) ** 2 / 2
    print(f"  pump phase {phase:4.2f} rad -> P({target}) = {p:.4f}, "
          f"coincidence probability {state.coincidence_probability:.4f}, "
          f"postselected fidelity {fid:.6f}")

# Postselection hides most of the splitter error; the raw projection shows it.
t_h = np.linspace(0.5, 1.0, 101)
t_v = np.linspace(0.0, 0.5, 101)
s0 = probability_surface(t_h, t_v, 0.0, "psi-")
spi = probability_surface(t_h, t_v, math.pi, "psi+")
print("\nPoints of the quadrant where P stays above 0.9:")
print(f"  phase 0  (psi-): {np.mean(s0 > 0.9):.1%}")
print(f"  phase pi (psi+): {np.mean(spi > 0.9):.1%}")

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, surface, title in zip(axes, (s0, spi), ("phase 0, psi-", "phase pi, psi+")):
        im = ax.pcolormesh(t_v, t_h, surface, vmin=0, vmax=1, shading="auto")
        ax.plot(measured.t_v, measured.t_h, "r+", ms=12)
        ax.set(title=title, xlabel="t_v")
    axes[0].set_ylabel("t_h")
    fig.colorbar(im, ax=axes, label="projection probability")
    save(fig, "splitter_surfaces.png")
