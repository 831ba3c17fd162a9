"""Birefringent walk-off on chip and its compensation in PM fiber.

Pairs are taken to be born at the centre of the poled section, so H and V
photons co-propagate over ``L - Lp/2`` of birefringent waveguide.  A PM
fiber with the fast and slow photon swapped onto the opposite axes undoes
the delay.

Units are carried in the field names: lengths of the chip in mm, fiber
lengths in m, delays and coherence times in ps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .units import SPEED_OF_LIGHT

__all__ = [
    "DEFAULT_DELTA_GROUP_INDEX",
    "DEFAULT_FIBER_BIREFRINGENCE",
    "WalkoffSpec",
    "effective_length",
    "walkoff_delay",
    "fiber_delay",
    "compensation_fiber_length",
    "residual_delay",
    "residual_indistinguishability",
    "transform_limited_coherence_time",
    "walkoff_budget",
    "budget_to_csv",
]

# Obtained by inverting the delay and fiber-length relations against
# 9.31 ps over 37 mm and 6.95 m of fiber.
DEFAULT_DELTA_GROUP_INDEX = 0.07544
DEFAULT_FIBER_BIREFRINGENCE = 4.016e-4

_C_MM_PER_PS = SPEED_OF_LIGHT * 1e3 * 1e-12
_C_M_PER_PS = SPEED_OF_LIGHT * 1e-12


@dataclass(frozen=True)
class WalkoffSpec:
    """Geometry and material constants for the walk-off budget.

    Give either both group indices or ``delta_group_index``, not both.
    """

    chip_length_mm: float = 49.0
    poled_length_mm: float = 24.0
    delta_group_index: float | None = None
    group_index_h: float | None = None
    group_index_v: float | None = None
    fiber_birefringence: float = DEFAULT_FIBER_BIREFRINGENCE
    coherence_time_ps: float = 14.2

    def __post_init__(self):
        has_pair = self.group_index_h is not None or self.group_index_v is not None
        if has_pair and self.delta_group_index is not None:
            raise ValueError("set either group_index_h/group_index_v or delta_group_index, not both")
        if has_pair and (self.group_index_h is None or self.group_index_v is None):
            raise ValueError("group_index_h and group_index_v must be given together")
        if not has_pair and self.delta_group_index is None:
            object.__setattr__(self, "delta_group_index", DEFAULT_DELTA_GROUP_INDEX)
        if self.poled_length_mm < 0:
            raise ValueError("walkoff.poled_length must be nonnegative")
        if self.chip_length_mm < self.poled_length_mm:
            raise ValueError("walkoff.chip_length must be at least walkoff.poled_length")
        if self.fiber_birefringence <= 0:
            raise ValueError("walkoff.fiber_birefringence must be positive")
        if self.coherence_time_ps <= 0:
            raise ValueError("walkoff.coherence_time must be positive")

    @property
    def group_index_difference(self) -> float:
        if self.delta_group_index is not None:
            return self.delta_group_index
        return self.group_index_h - self.group_index_v


def effective_length(spec: WalkoffSpec) -> float:
    """Birefringent path length seen by a pair born mid-poling, in mm."""
    return spec.chip_length_mm - spec.poled_length_mm / 2.0


def walkoff_delay(spec: WalkoffSpec) -> float:
    """H/V group delay at the chip output, in ps."""
    return spec.group_index_difference * effective_length(spec) / _C_MM_PER_PS


def fiber_delay(fiber_length_m: float, birefringence: float) -> float:
    """Differential group delay of a PM fiber, in ps."""
    return birefringence * fiber_length_m / _C_M_PER_PS


def compensation_fiber_length(delay_ps: float, birefringence: float) -> float:
    """PM fiber length (m) whose differential delay equals ``delay_ps``."""
    if not birefringence > 0:
        raise ValueError(f"birefringence must be positive, got {birefringence!r}")
    return delay_ps * _C_M_PER_PS / birefringence


def residual_delay(spec: WalkoffSpec, fiber_length_m: float | None = None) -> float:
    """Delay left after the fiber; ``None`` means an ideally cut fiber."""
    delay = walkoff_delay(spec)
    if fiber_length_m is None:
        return 0.0
    return delay - fiber_delay(fiber_length_m, spec.fiber_birefringence)


def residual_indistinguishability(residual_delay_ps: float, coherence_time_ps: float) -> float:
    """Gaussian coherence factor exp(-d^2 / (2 tc^2)) for a leftover delay."""
    if not coherence_time_ps > 0:
        raise ValueError("coherence_time must be positive")
    return math.exp(-(residual_delay_ps ** 2) / (2.0 * coherence_time_ps ** 2))


def transform_limited_coherence_time(bandwidth_nm: float, center_nm: float) -> float:
    """FWHM duration (ps) of a transform-limited Gaussian with this bandwidth.

    Uses the Gaussian time-bandwidth product 2 ln2 / pi.
    """
    dnu = SPEED_OF_LIGHT * (bandwidth_nm * 1e-9) / (center_nm * 1e-9) ** 2
    return 2.0 * math.log(2.0) / math.pi / dnu * 1e12


def walkoff_budget(spec: WalkoffSpec, fiber_length_m: float | None = None) -> list[tuple[str, float, str]]:
    """Rows of (quantity, value, unit) describing the delay budget."""
    delay = walkoff_delay(spec)
    ideal_fiber = compensation_fiber_length(delay, spec.fiber_birefringence)
    fiber = ideal_fiber if fiber_length_m is None else fiber_length_m
    resid = residual_delay(spec, fiber_length_m)
    return [
        ("chip_length", spec.chip_length_mm, "mm"),
        ("poled_length", spec.poled_length_mm, "mm"),
        ("effective_length", effective_length(spec), "mm"),
        ("delta_group_index", spec.group_index_difference, "1"),
        ("walkoff_delay", delay, "ps"),
        ("fiber_birefringence", spec.fiber_birefringence, "1"),
        ("compensation_fiber_length", ideal_fiber, "m"),
        ("fiber_length", fiber, "m"),
        ("residual_delay", resid, "ps"),
        ("coherence_time", spec.coherence_time_ps, "ps"),
        ("residual_indistinguishability", residual_indistinguishability(resid, spec.coherence_time_ps), "1"),
    ]


def budget_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["quantity", "value", "unit"])
    for name, value, unit in rows:
        writer.writerow([name, repr(float(value)), unit])
    return buf.getvalue()
