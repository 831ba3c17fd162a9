"""Source configuration: JSON schema, unit checking and validation.

Every dimensioned quantity is written as ``{"value": x, "unit": "nm"}``;
dimensionless ones are bare numbers.  :func:`validate_config` collects all
problems before failing so a config can be fixed in one pass.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .polarization import PumpConfig, SplitterParams
from .spectral import FilterSpec, GridSpec, PhaseMatchingSpec
from .temporal import (
    DEFAULT_DELTA_GROUP_INDEX,
    DEFAULT_FIBER_BIREFRINGENCE,
    WalkoffSpec,
    transform_limited_coherence_time,
)
from .units import UnitError, convert, dimension

__all__ = [
    "ConfigError",
    "Detection",
    "SourceConfig",
    "validate_config",
    "load_config",
    "default_config_text",
    "default_config",
    "apply_overrides",
]


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class Detection:
    mean_total: float = 1e5
    background_rate: float = 0.0  # 1/s
    integration_seconds: float = 1.0
    efficiency: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class SourceConfig:
    splitter: SplitterParams
    pump: PumpConfig
    pm_wg1: PhaseMatchingSpec
    pm_wg2: PhaseMatchingSpec
    walkoff: WalkoffSpec
    filters: tuple[FilterSpec, FilterSpec] | None = None
    fiber_length_m: float | None = None
    detection: Detection = Detection()
    grid: GridSpec = GridSpec()
    chip_geometry: dict = field(default_factory=dict)


_MISSING = object()
_REQUIRED = object()


class _Reader:
    """Walks the raw mapping, converting leaves and recording errors."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.errors: list[str] = []

    def section(self, path: str, required: bool = True) -> dict | None:
        node = self._get(path)
        if node is _MISSING:
            if required:
                self.errors.append(f"{path} is missing")
            return None
        if node is None and not required:
            return None
        if not isinstance(node, dict):
            self.errors.append(f"{path} must be an object")
            return None
        return node

    def _get(self, path: str):
        node: Any = self.raw
        for key in path.split("."):
            if not isinstance(node, dict) or key not in node:
                return _MISSING
            node = node[key]
        return node

    def number(self, path, default=_REQUIRED, lo=None, hi=None,
               lo_open=False, hi_open=False, integer=False):
        node = self._get(path)
        if node is _MISSING or node is None:
            if default is _REQUIRED:
                self.errors.append(f"{path} is missing")
                return None
            return default
        if isinstance(node, dict):
            self.errors.append(f"{path} is dimensionless and must be a plain number")
            return None
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            self.errors.append(f"{path} must be a number")
            return None
        value = float(node)
        if integer:
            if value != math.floor(value):
                self.errors.append(f"{path} must be an integer")
                return None
            value = int(value)
        return self._check_range(path, value, lo, hi, lo_open, hi_open)

    def quantity(self, path, target: str, default=_REQUIRED, lo=None, hi=None,
                 lo_open=False, hi_open=False, nullable=False):
        node = self._get(path)
        if node is _MISSING or (node is None and not nullable):
            if default is _REQUIRED:
                self.errors.append(f"{path} is missing")
                return None
            return default
        if node is None:
            return None
        if not isinstance(node, dict) or set(node) != {"value", "unit"}:
            self.errors.append(
                f"{path} must be a {{value, unit}} pair in {dimension(target)} units"
            )
            return None
        value, unit = node["value"], node["unit"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.errors.append(f"{path}.value must be a number")
            return None
        try:
            converted = convert(value, unit, target)
        except UnitError as exc:
            self.errors.append(f"{path}.unit: {exc}")
            return None
        return self._check_range(path, converted, lo, hi, lo_open, hi_open, unit=target)

    def choice(self, path, options, default=_REQUIRED):
        node = self._get(path)
        if node is _MISSING or node is None:
            if default is _REQUIRED:
                self.errors.append(f"{path} is missing")
                return None
            return default
        if node not in options:
            self.errors.append(f"{path} must be one of {sorted(options)}, got {node!r}")
            return None
        return node

    def _check_range(self, path, value, lo, hi, lo_open, hi_open, unit=""):
        suffix = f" {unit}" if unit else ""
        bad_lo = lo is not None and (value <= lo if lo_open else value < lo)
        bad_hi = hi is not None and (value >= hi if hi_open else value > hi)
        if math.isnan(value) or bad_lo or bad_hi:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            lo_s = "-inf" if lo is None else f"{lo:g}"
            hi_s = "inf" if hi is None else f"{hi:g}"
            self.errors.append(f"{path} must lie in {left}{lo_s},{hi_s}{right}{suffix}, got {value:g}")
            return None
        return value


_PROFILES = {"sinc_squared_amplitude", "gaussian"}
_SHAPES = {"rectangular", "gaussian"}


def _pm(r: _Reader, path: str) -> dict | None:
    if r.section(path) is None:
        return None
    return dict(
        center_wavelength=r.quantity(f"{path}.center_wavelength", "nm", lo=0, lo_open=True),
        fwhm=r.quantity(f"{path}.fwhm", "nm", lo=0, lo_open=True),
        orientation_deg=r.quantity(f"{path}.orientation", "deg", lo=-90, hi=0, hi_open=True),
        profile=r.choice(f"{path}.profile", _PROFILES, default="sinc_squared_amplitude"),
    )


def _filter(r: _Reader, path: str) -> dict | None:
    if r.section(path) is None:
        return None
    return dict(
        center_wavelength=r.quantity(f"{path}.center_wavelength", "nm", lo=0, lo_open=True),
        bandwidth_fwhm=r.quantity(f"{path}.bandwidth_fwhm", "nm", lo=0, lo_open=True),
        shape=r.choice(f"{path}.shape", _SHAPES, default="rectangular"),
    )


def _complete(parts) -> bool:
    return parts is not None and all(v is not None for v in parts.values())


def validate_config(raw) -> SourceConfig:
    """Parse and check a configuration (JSON text or an already-loaded mapping).

    Raises
    ------
    ConfigError
        With one message per violated field, each naming its dotted path.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    r = _Reader(raw)

    splitter = None
    if r.section("splitter") is not None:
        splitter = dict(
            t_h=r.number("splitter.t_h", lo=0, hi=1),
            t_v=r.number("splitter.t_v", lo=0, hi=1),
        )

    pump = None
    if r.section("pump") is not None:
        pump = dict(
            phase=r.quantity("pump.phase", "rad"),
            weight_1=r.number("pump.weight_1", default=1.0, lo=0),
            weight_2=r.number("pump.weight_2", default=1.0, lo=0),
            center_wavelength=r.quantity("pump.center_wavelength", "nm", lo=0, lo_open=True),
            bandwidth_fwhm=r.quantity("pump.bandwidth_fwhm", "nm", lo=0),
            regime=r.choice("pump.regime", {"cw", "pulsed"}),
            cw_linewidth=r.quantity("pump.cw_linewidth", "nm", default=1e-3, lo=0, lo_open=True),
        )
        if _complete(pump):
            if (pump["bandwidth_fwhm"] == 0) != (pump["regime"] == "cw"):
                r.errors.append("pump.bandwidth_fwhm must be 0 exactly when pump.regime is 'cw'")
            if pump["weight_1"] == 0 and pump["weight_2"] == 0:
                r.errors.append("pump.weight_1 and pump.weight_2 must not both be 0")

    pm1 = _pm(r, "pm_wg1")
    pm2 = _pm(r, "pm_wg2")

    filters = None
    if r.section("filters", required=False) is not None:
        filters = (_filter(r, "filters.signal"), _filter(r, "filters.idler"))

    walk = None
    if r.section("walkoff") is not None:
        walk = dict(
            chip_length_mm=r.quantity("walkoff.chip_length", "mm", lo=0, lo_open=True),
            poled_length_mm=r.quantity("walkoff.poled_length", "mm", lo=0),
            fiber_birefringence=r.number(
                "walkoff.fiber_birefringence", default=DEFAULT_FIBER_BIREFRINGENCE, lo=0, lo_open=True
            ),
        )
        gh = r.number("walkoff.group_index_h", default=None, lo=0, lo_open=True)
        gv = r.number("walkoff.group_index_v", default=None, lo=0, lo_open=True)
        dn = r.number("walkoff.delta_group_index", default=None)
        if (gh is None) != (gv is None):
            r.errors.append("walkoff.group_index_h and walkoff.group_index_v must be given together")
        elif gh is not None and dn is not None:
            r.errors.append("walkoff: give either delta_group_index or the group index pair, not both")
        elif gh is not None:
            walk.update(group_index_h=gh, group_index_v=gv)
        else:
            walk["delta_group_index"] = DEFAULT_DELTA_GROUP_INDEX if dn is None else dn
        if _complete({k: walk[k] for k in ("chip_length_mm", "poled_length_mm")}):
            if walk["chip_length_mm"] < walk["poled_length_mm"]:
                r.errors.append("walkoff.chip_length must be at least walkoff.poled_length")
    fiber_length = r.quantity("walkoff.fiber_length", "m", default=None, lo=0, nullable=True)
    coherence = r.quantity("walkoff.coherence_time", "ps", default=None, lo=0, lo_open=True,
                           nullable=True)

    detection = dict(
        mean_total=r.number("detection.mean_total", default=1e5, lo=0, lo_open=True),
        background_rate=r.quantity("detection.background_rate", "1/s", default=0.0, lo=0),
        integration_seconds=r.quantity("detection.integration_time", "s", default=1.0, lo=0, lo_open=True),
        efficiency=r.number("detection.efficiency", default=1.0, lo=0, hi=1, lo_open=True),
        seed=r.number("detection.seed", default=0, lo=0, integer=True),
    )
    grid = dict(
        points=r.number("grid.points", default=1024, lo=64, integer=True),
        half_span=r.quantity("grid.half_span", "nm", default=4.0, lo=0, lo_open=True),
    )

    geometry = raw.get("chip_geometry", {})
    if not isinstance(geometry, dict):
        r.errors.append("chip_geometry must be an object")
        geometry = {}

    if r.errors:
        raise ConfigError(r.errors)

    # all leaves are valid; constructor checks catch any remaining cross-field issue
    try:
        pm1_obj = PhaseMatchingSpec(**pm1)
        filter_objs = None
        if filters is not None:
            filter_objs = (FilterSpec(**filters[0]), FilterSpec(**filters[1]))
        if coherence is None:
            bw = filter_objs[0].bandwidth_fwhm if filter_objs else pm1_obj.fwhm
            coherence = transform_limited_coherence_time(bw, pm1_obj.center_wavelength)
        config = SourceConfig(
            splitter=SplitterParams(**splitter),
            pump=PumpConfig(**pump),
            pm_wg1=pm1_obj,
            pm_wg2=PhaseMatchingSpec(**pm2),
            walkoff=WalkoffSpec(coherence_time_ps=coherence, **walk),
            filters=filter_objs,
            fiber_length_m=fiber_length,
            detection=Detection(**detection),
            grid=GridSpec(center=pm1_obj.center_wavelength, **grid),
            chip_geometry=copy.deepcopy(geometry),
        )
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    return config


def default_config_text() -> str:
    return resources.files("entsource").joinpath("data/reference_config.json").read_text()


def default_config() -> dict:
    return json.loads(default_config_text())


def load_config(path=None, overrides: dict | None = None) -> SourceConfig:
    """Read a config file (the shipped default when ``path`` is None)."""
    if path is None:
        raw = default_config()
    else:
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path} is not valid JSON: {exc}"]) from None
    if overrides:
        raw = apply_overrides(raw, overrides)
    return validate_config(raw)


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """Return a copy of ``raw`` with dotted-path keys replaced.

    ``{"pump.phase.value": 3.14159}`` sets one nested leaf; a value of
    ``None`` stores JSON null.
    """
    out = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        keys = dotted.split(".")
        node = out
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[keys[-1]] = value
    return out
