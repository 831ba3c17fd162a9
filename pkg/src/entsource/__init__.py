"""Numerical model of an on-chip, two-waveguide polarization-entangled photon-pair source."""

from .config import ConfigError, SourceConfig, load_config, validate_config
from .pipeline import PredictedState, predict_state
from .polarization import (
    PairAmplitudes,
    PumpConfig,
    PumpRegime,
    SplitterParams,
    bell_projection_probability,
    output_state,
    postselect_coincidence,
)
from .scenarios import SCENARIO_NAMES, run_scenario
from .spectral import FilterSpec, GridSpec, JsaGrid, PhaseMatchingSpec, build_jsa, exchange_overlap
from .states import DensityMatrix2Q, MeasurementSetting, chsh_fixed, chsh_optimal, fidelity
from .temporal import WalkoffSpec, compensation_fiber_length, walkoff_delay
from .tomography import simulate_counts, tomography_linear, tomography_mle

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "SourceConfig",
    "load_config",
    "validate_config",
    "PredictedState",
    "predict_state",
    "PairAmplitudes",
    "PumpConfig",
    "PumpRegime",
    "SplitterParams",
    "bell_projection_probability",
    "output_state",
    "postselect_coincidence",
    "SCENARIO_NAMES",
    "run_scenario",
    "FilterSpec",
    "GridSpec",
    "JsaGrid",
    "PhaseMatchingSpec",
    "build_jsa",
    "exchange_overlap",
    "DensityMatrix2Q",
    "MeasurementSetting",
    "chsh_fixed",
    "chsh_optimal",
    "fidelity",
    "WalkoffSpec",
    "compensation_fiber_length",
    "walkoff_delay",
    "simulate_counts",
    "tomography_linear",
    "tomography_mle",
]
