"""Two-photon polarization/path algebra of the coupled-waveguide source.

Two poled waveguides (inputs 1 and 2) each emit an orthogonally polarized
H/V pair.  Both feed a polarization dependent coupler with outputs A and B.
Every creation operator of an input mode is mapped onto the output modes by

    a1H -> sqrt(tH) aAH - sqrt(rH) aBH
    a2H -> sqrt(rH) aAH + sqrt(tH) aBH

and identically for V.  Expanding the superposition of the two pair sources
gives four two-photon terms, collected in :class:`PairAmplitudes`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "SplitterParams",
    "PumpRegime",
    "PumpConfig",
    "PairAmplitudes",
    "CoincidenceState",
    "DegenerateStateError",
    "splitter_matrix",
    "apply_splitter",
    "output_state",
    "bell_projection_probability",
    "postselect_coincidence",
    "probability_surface",
]

_NORM_ATOL = 1e-12


class DegenerateStateError(ValueError):
    """Raised when no photon pair can leave through separate outputs."""


@dataclass(frozen=True)
class SplitterParams:
    """Polarization dependent transmissivities of the on-chip splitter.

    Reflectivities are derived as ``1 - t`` so ``t + r == 1`` holds exactly.
    """

    t_h: float
    t_v: float

    def __post_init__(self):
        for name in ("t_h", "t_v"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0 or math.isnan(value):
                raise ValueError(f"splitter.{name} must lie in [0,1], got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def r_h(self) -> float:
        return 1.0 - self.t_h

    @property
    def r_v(self) -> float:
        return 1.0 - self.t_v

    @classmethod
    def ideal(cls) -> "SplitterParams":
        return cls(t_h=1.0, t_v=0.0)


class PumpRegime(str, Enum):
    CW = "cw"
    PULSED = "pulsed"


@dataclass(frozen=True)
class PumpConfig:
    """Pump beams driving both waveguides.

    Parameters
    ----------
    phase : float
        Relative phase between the two pump beams in radians.
    weight_1, weight_2 : float
        Nonnegative source weights; they are normalized internally.
    center_wavelength : float
        Pump wavelength in nm.
    bandwidth_fwhm : float
        FWHM of the pump spectral amplitude in nm. Zero means CW.
    regime : PumpRegime
        ``cw`` or ``pulsed``; must agree with ``bandwidth_fwhm``.
    cw_linewidth : float
        Linewidth floor (nm) used to draw a CW pump on a finite grid.
    """

    phase: float = 0.0
    weight_1: float = 1.0
    weight_2: float = 1.0
    center_wavelength: float = 777.22
    bandwidth_fwhm: float = 0.0
    regime: PumpRegime = PumpRegime.CW
    cw_linewidth: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "regime", PumpRegime(self.regime))
        if self.weight_1 < 0 or self.weight_2 < 0:
            raise ValueError("pump weights must be nonnegative")
        if self.weight_1 ** 2 + self.weight_2 ** 2 <= 0:
            raise ValueError("pump weights must not both vanish")
        if self.center_wavelength <= 0:
            raise ValueError("pump.center_wavelength must be positive")
        if self.bandwidth_fwhm < 0:
            raise ValueError("pump.bandwidth_fwhm must be nonnegative")
        if (self.bandwidth_fwhm == 0) != (self.regime is PumpRegime.CW):
            raise ValueError("pump.bandwidth_fwhm is 0 exactly when pump.regime is 'cw'")
        if self.cw_linewidth <= 0:
            raise ValueError("pump.cw_linewidth must be positive")

    @property
    def normalized_weights(self) -> tuple[float, float]:
        norm = math.hypot(self.weight_1, self.weight_2)
        return self.weight_1 / norm, self.weight_2 / norm

    @property
    def envelope_fwhm(self) -> float:
        """Width actually used for the spectral envelope (nm)."""
        if self.regime is PumpRegime.CW:
            return self.cw_linewidth
        return self.bandwidth_fwhm


@dataclass(frozen=True)
class PairAmplitudes:
    """Amplitudes over the ordered basis (AH AV, AH BV, AV BH, BH BV)."""

    c_aa: complex
    c_ahbv: complex
    c_avbh: complex
    c_bb: complex

    def __post_init__(self):
        norm2 = float(np.sum(np.abs(self.as_array()) ** 2))
        if abs(norm2 - 1.0) > _NORM_ATOL:
            raise ValueError(f"pair amplitudes must be normalized (|c|^2 sum = {norm2!r})")

    def as_array(self) -> np.ndarray:
        return np.array([self.c_aa, self.c_ahbv, self.c_avbh, self.c_bb], dtype=complex)

    @classmethod
    def from_array(cls, values) -> "PairAmplitudes":
        values = np.asarray(values, dtype=complex)
        values = values / np.linalg.norm(values)
        return cls(*(complex(v) for v in values))

    @property
    def coincidence_probability(self) -> float:
        return abs(self.c_ahbv) ** 2 + abs(self.c_avbh) ** 2


@dataclass(frozen=True)
class CoincidenceState:
    """Polarization qubit pair left after one photon is seen in each output.

    ``qubit_state`` is expressed over (H_A V_B, V_A H_B).
    """

    qubit_state: np.ndarray
    success_probability: float

    def __post_init__(self):
        psi = np.asarray(self.qubit_state, dtype=complex)
        if psi.shape != (2,):
            raise ValueError("qubit_state must have two components")
        if abs(np.linalg.norm(psi) - 1.0) > _NORM_ATOL:
            raise ValueError("qubit_state must be normalized")
        psi.setflags(write=False)
        object.__setattr__(self, "qubit_state", psi)
        if not 0.0 <= self.success_probability <= 1.0 + _NORM_ATOL:
            raise ValueError("success_probability must lie in [0,1]")

    def as_two_qubit_vector(self) -> np.ndarray:
        """Embed into the (HH, HV, VH, VV) basis, first slot = output A."""
        return np.array([0.0, self.qubit_state[0], self.qubit_state[1], 0.0], dtype=complex)


def splitter_matrix(params: SplitterParams, polarization: str) -> np.ndarray:
    """Return U with U[input, output] for inputs (1, 2) and outputs (A, B)."""
    pol = _check_polarization(polarization)
    t = params.t_h if pol == "H" else params.t_v
    st, sr = math.sqrt(t), math.sqrt(1.0 - t)
    return np.array([[st, -sr], [sr, st]])


def apply_splitter(input_mode: int, polarization: str, params: SplitterParams) -> np.ndarray:
    """Output-mode amplitudes (A, B) of one photon entering ``input_mode``.

    >>> apply_splitter(1, "H", SplitterParams(1.0, 0.0))
    array([ 1., -0.])
    """
    if input_mode not in (1, 2):
        raise ValueError(f"input_mode must be 1 or 2, got {input_mode!r}")
    return splitter_matrix(params, polarization)[input_mode - 1].copy()


def _check_polarization(polarization: str) -> str:
    if polarization not in ("H", "V"):
        raise ValueError(f"polarization must be 'H' or 'V', got {polarization!r}")
    return polarization


def output_state(pump: PumpConfig, params: SplitterParams) -> PairAmplitudes:
    """Two-photon state at the splitter outputs.

    The pair from waveguide 1 carries weight ``w1`` and the pair from
    waveguide 2 carries ``w2 * exp(i*phase)``.
    """
    w1, w2 = pump.normalized_weights
    e = w2 * np.exp(1j * pump.phase)
    th, tv, rh, rv = params.t_h, params.t_v, params.r_h, params.r_v
    amps = np.array(
        [
            w1 * math.sqrt(tv * th) + e * math.sqrt(rv * rh),
            w1 * math.sqrt(rv * th) - e * math.sqrt(tv * rh),
            w1 * math.sqrt(tv * rh) - e * math.sqrt(rv * th),
            w1 * math.sqrt(rv * rh) + e * math.sqrt(tv * th),
        ],
        dtype=complex,
    )
    return PairAmplitudes.from_array(amps)


def bell_projection_probability(state: PairAmplitudes, which: str) -> float:
    """Probability ``|<psi+-|psi_out>|^2`` of the two-output Bell state.

    ``which`` is ``"psi-"`` or ``"psi+"`` with psi+- = (|H_A V_B> +- |V_A H_B>)/sqrt(2).
    """
    if which == "psi-":
        overlap = state.c_ahbv - state.c_avbh
    elif which == "psi+":
        overlap = state.c_ahbv + state.c_avbh
    else:
        raise ValueError(f"which must be 'psi+' or 'psi-', got {which!r}")
    norm2 = float(np.sum(np.abs(state.as_array()) ** 2))
    return min(abs(overlap) ** 2 / (2.0 * norm2), 1.0)


def postselect_coincidence(state: PairAmplitudes) -> CoincidenceState:
    """Keep only events with one photon in A and one in B."""
    p = state.coincidence_probability
    if p <= 0.0:
        raise DegenerateStateError("state has no amplitude with one photon per output")
    qubit = np.array([state.c_ahbv, state.c_avbh]) / math.sqrt(p)
    return CoincidenceState(qubit, min(p, 1.0))


def probability_surface(t_h, t_v, phase: float, which: str) -> np.ndarray:
    """Bell-state probability over a (t_h, t_v) grid for equal source weights.

    Returns an array of shape ``(len(t_h), len(t_v))``.
    """
    pump = PumpConfig(phase=phase)
    t_h = np.asarray(t_h, dtype=float)
    t_v = np.asarray(t_v, dtype=float)
    out = np.empty((t_h.size, t_v.size))
    for i, th in enumerate(t_h):
        for j, tv in enumerate(t_v):
            amps = output_state(pump, SplitterParams(th, tv))
            out[i, j] = bell_projection_probability(amps, which)
    return out
