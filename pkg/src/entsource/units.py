"""Minimal unit tags for configuration quantities.

Physical quantities in configs are ``{"value": x, "unit": "nm"}`` pairs.
Each unit belongs to one dimension; conversion across dimensions raises.
"""

from __future__ import annotations

import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_UNITS: dict[str, tuple[str, float]] = {
    # length, in metres
    "pm": ("length", 1e-12),
    "nm": ("length", 1e-9),
    "um": ("length", 1e-6),
    "µm": ("length", 1e-6),
    "mm": ("length", 1e-3),
    "cm": ("length", 1e-2),
    "m": ("length", 1.0),
    # time, in seconds
    "fs": ("time", 1e-15),
    "ps": ("time", 1e-12),
    "ns": ("time", 1e-9),
    "us": ("time", 1e-6),
    "s": ("time", 1.0),
    # angle, in radians
    "rad": ("angle", 1.0),
    "deg": ("angle", math.pi / 180.0),
    # rates
    "1/s": ("rate", 1.0),
    "Hz": ("rate", 1.0),
    # dimensionless
    "1": ("dimensionless", 1.0),
}


class UnitError(ValueError):
    pass


def dimension(unit: str) -> str:
    try:
        return _UNITS[unit][0]
    except KeyError:
        raise UnitError(f"unknown unit {unit!r}") from None


def convert(value: float, unit: str, target: str) -> float:
    """Convert ``value`` from ``unit`` to ``target`` (same dimension only)."""
    dim_from, scale_from = _lookup(unit)
    dim_to, scale_to = _lookup(target)
    if dim_from != dim_to:
        raise UnitError(f"cannot convert {unit!r} ({dim_from}) to {target!r} ({dim_to})")
    return float(value) * scale_from / scale_to


def _lookup(unit: str) -> tuple[str, float]:
    try:
        return _UNITS[unit]
    except KeyError:
        raise UnitError(f"unknown unit {unit!r}") from None
