"""Birefringent walk-off and the fiber that undoes it.

H and V photons travel at different group velocities in the chip, so a pair
born near the input leaves with a polarization-dependent delay. A length of
polarization-maintaining fiber with its slow axis crossed cancels it. This demo
prints the delay budget. It then shows how much coherence survives when the
fiber is cut slightly wrong.
"""

import numpy as np

from entsource import WalkoffSpec, compensation_fiber_length, walkoff_delay
from entsource.temporal import (
    residual_delay,
    residual_indistinguishability,
    transform_limited_coherence_time,
    walkoff_budget,
)

from _plotting import plt, save

# 0.25 nm filters set the single-photon coherence time
tau_c = transform_limited_coherence_time(0.25, 1554.44)
chip = WalkoffSpec(chip_length_mm=49.0, poled_length_mm=24.0, coherence_time_ps=tau_c)

print("Delay budget")
for name, value, unit in walkoff_budget(chip):
    print(f"  {name:28s} {value:12.6g} {unit}")

ideal = compensation_fiber_length(walkoff_delay(chip), chip.fiber_birefringence)
print(f"\nCoherence time behind 0.25 nm filters: {tau_c:.2f} ps")
print("Fiber length  residual delay  temporal overlap")
lengths = ideal + np.array([-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0])
for length in lengths:
    dt = residual_delay(chip, length)
    print(f"  {length:8.3f} m   {dt:+8.3f} ps   {residual_indistinguishability(dt, tau_c):.4f}")

if plt is not None:
    sweep = np.linspace(ideal - 3, ideal + 3, 301)
    overlap = [residual_indistinguishability(residual_delay(chip, x), tau_c) for x in sweep]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sweep, overlap)
    ax.axvline(ideal, ls="--", c="gray")
    ax.set(xlabel="compensation fiber length (m)", ylabel="temporal overlap")
    save(fig, "walkoff.png")
