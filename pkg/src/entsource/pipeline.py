"""From a source configuration to a predicted two-photon polarization state.

The polarization amplitudes come from the splitter model.  Spectral and
temporal distinguishability then reduce the coherence between the HV and VH
terms of the post-selected state by a single factor

    coherence_factor = exchange x inter_waveguide x temporal

where ``exchange`` is the signal/idler symmetry of the (filtered) JSA,
``inter_waveguide`` the overlap of the two waveguides' tuning curves and
``temporal`` the Gaussian penalty for any walk-off left after the fiber.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SourceConfig
from .polarization import (
    CoincidenceState,
    PairAmplitudes,
    output_state,
    postselect_coincidence,
)
from .spectral import (
    JsaGrid,
    apply_filter,
    build_jsa,
    curve_overlap,
    exchange_overlap,
    shg_curve,
)
from .states import (
    DensityMatrix2Q,
    bell_state,
    chsh_fixed,
    chsh_optimal,
    fidelity,
)
from .temporal import residual_delay, residual_indistinguishability

__all__ = [
    "PredictedState",
    "dephased_state",
    "shg_axis",
    "predict_state",
    "state_metrics",
]


@dataclass(frozen=True)
class PredictedState:
    rho: DensityMatrix2Q
    amplitudes: PairAmplitudes
    coincidence: CoincidenceState
    coherence_factor: float
    factors: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    jsa: tuple[JsaGrid, JsaGrid] | None = field(default=None, repr=False)


def dephased_state(coincidence: CoincidenceState, coherence_factor: float) -> DensityMatrix2Q:
    """Pure coincidence state with its HV/VH coherence scaled by ``coherence_factor``."""
    if not 0.0 <= coherence_factor <= 1.0:
        raise ValueError("coherence_factor must lie in [0,1]")
    psi = coincidence.as_two_qubit_vector()
    rho = np.outer(psi, psi.conj())
    rho[1, 2] *= coherence_factor
    rho[2, 1] *= coherence_factor
    return DensityMatrix2Q(rho)


def shg_axis(config: SourceConfig, points: int = 20001) -> np.ndarray:
    """Common wavelength axis for both tuning curves: +-15 widths of the wider one."""
    center = 0.5 * (config.pm_wg1.center_wavelength + config.pm_wg2.center_wavelength)
    half = 15.0 * max(config.pm_wg1.fwhm, config.pm_wg2.fwhm)
    return np.linspace(center - half, center + half, points)


def state_metrics(rho: DensityMatrix2Q) -> dict:
    return {
        "fidelity_psi_minus": fidelity(rho, bell_state("psi-")),
        "fidelity_psi_plus": fidelity(rho, bell_state("psi+")),
        "chsh_fixed": chsh_fixed(rho),
        "chsh_optimal": chsh_optimal(rho),
        "purity": rho.purity,
    }


def predict_state(config: SourceConfig, keep_jsa: bool = False) -> PredictedState:
    amps = output_state(config.pump, config.splitter)
    coinc = postselect_coincidence(amps)

    jsas = []
    transmissions = []
    for pm in (config.pm_wg1, config.pm_wg2):
        jsa = build_jsa(pm, config.pump, config.grid)
        if config.filters is not None:
            jsa, t = apply_filter(jsa, *config.filters)
            transmissions.append(t)
        jsas.append(jsa)
    exchange = float(np.mean([exchange_overlap(j) for j in jsas]))

    axis = shg_axis(config)
    inter = curve_overlap(shg_curve(config.pm_wg1, axis), shg_curve(config.pm_wg2, axis))

    resid = residual_delay(config.walkoff, config.fiber_length_m)
    temporal = residual_indistinguishability(resid, config.walkoff.coherence_time_ps)

    cf = exchange * inter * temporal
    rho = dephased_state(coinc, cf)
    metrics = state_metrics(rho)
    metrics["success_probability"] = coinc.success_probability
    factors = {
        "exchange_overlap": exchange,
        "inter_waveguide_overlap": inter,
        "temporal_factor": temporal,
        "residual_delay_ps": resid,
        "pair_transmission": float(np.mean(transmissions)) if transmissions else 1.0,
    }
    return PredictedState(
        rho=rho,
        amplitudes=amps,
        coincidence=coinc,
        coherence_factor=cf,
        factors=factors,
        metrics=metrics,
        jsa=tuple(jsas) if keep_jsa else None,
    )
