"""Phase matching, joint spectral amplitudes and spectral filtering.

All spectral axes are vacuum wavelengths in nm.  The joint spectral
amplitude (JSA) of a pair is the product of the phase-matching (PM)
amplitude of the poled waveguide and the pump envelope, which enforces
``1/lp = 1/ls + 1/li`` exactly.

The PM amplitude is a ridge in the (signal, idler) plane with a fixed
orientation.  Its width is parametrized by the FWHM of the SHG tuning
curve, i.e. of ``|PM|^2`` sampled along the degenerate line ``ls == li``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit
from scipy.special import erf

from .polarization import PumpConfig, PumpRegime

__all__ = [
    "PMProfile",
    "FilterShape",
    "PhaseMatchingSpec",
    "FilterSpec",
    "ShgCurve",
    "GridSpec",
    "JsaGrid",
    "ResolutionError",
    "pm_amplitude",
    "shg_curve",
    "curve_overlap",
    "pump_wavelength",
    "pump_envelope",
    "build_jsa",
    "exchange_overlap",
    "jsa_overlap",
    "apply_filter",
    "filter_amplitude",
    "principal_axis_angle",
    "schmidt_number",
    "fwhm",
    "jsa_to_csv",
    "jsa_from_csv",
]

# np.sinc(x)**2 == 1/2
SINC2_HALF_WIDTH = 0.4429464706893352
MIN_SAMPLES_PER_FWHM = 8


class ResolutionError(ValueError):
    """Grid too coarse for the narrowest resolved spectral feature."""


class PMProfile(str, Enum):
    SINC = "sinc_squared_amplitude"
    GAUSSIAN = "gaussian"


class FilterShape(str, Enum):
    RECTANGULAR = "rectangular"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PhaseMatchingSpec:
    center_wavelength: float = 1554.44
    fwhm: float = 0.3325
    orientation_deg: float = -33.5
    profile: PMProfile = PMProfile.SINC

    def __post_init__(self):
        object.__setattr__(self, "profile", PMProfile(self.profile))
        if not self.fwhm > 0:
            raise ValueError("pm.fwhm must be positive")
        # -90 (ridge along the idler axis) is accepted for separable test cases
        if not -90.0 <= self.orientation_deg < 0.0:
            raise ValueError("pm.orientation must lie in [-90, 0) deg")
        if self.center_wavelength <= 0:
            raise ValueError("pm.center_wavelength must be positive")


@dataclass(frozen=True)
class FilterSpec:
    center_wavelength: float = 1554.44
    bandwidth_fwhm: float = 0.25
    shape: FilterShape = FilterShape.RECTANGULAR

    def __post_init__(self):
        object.__setattr__(self, "shape", FilterShape(self.shape))
        if not self.bandwidth_fwhm > 0:
            raise ValueError("filter.bandwidth_fwhm must be positive")


@dataclass(frozen=True)
class ShgCurve:
    wavelength_axis: np.ndarray
    intensity: np.ndarray
    fitted_center: float
    fitted_fwhm: float


@dataclass(frozen=True)
class GridSpec:
    """Square wavelength grid ``center +- half_span`` with ``points`` samples per axis."""

    center: float = 1554.44
    half_span: float = 4.0
    points: int = 1024

    def __post_init__(self):
        if self.points < 64:
            raise ValueError("grid needs at least 64 points per axis")
        if not self.half_span > 0:
            raise ValueError("grid half_span must be positive")

    def axis(self) -> np.ndarray:
        return np.linspace(self.center - self.half_span, self.center + self.half_span, self.points)

    @property
    def step(self) -> float:
        return 2.0 * self.half_span / (self.points - 1)


@dataclass(frozen=True)
class JsaGrid:
    """Complex JSA sampled on uniform axes, ``amplitude[i_signal, i_idler]``.

    After construction the amplitude is normalized so that the Riemann sum of
    ``|f|^2 dls dli`` is one.
    """

    signal_axis: np.ndarray
    idler_axis: np.ndarray
    amplitude: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.signal_axis, dtype=float)
        i = np.asarray(self.idler_axis, dtype=float)
        f = np.asarray(self.amplitude, dtype=complex)
        for name, ax in (("signal_axis", s), ("idler_axis", i)):
            if ax.ndim != 1 or ax.size < 64:
                raise ValueError(f"{name} needs at least 64 samples")
            d = np.diff(ax)
            if np.any(d <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            if not np.allclose(d, d[0], rtol=1e-6, atol=0):
                raise ValueError(f"{name} must be uniformly spaced")
        if f.shape != (s.size, i.size):
            raise ValueError("amplitude shape must match (signal, idler) axes")
        norm2 = float(np.sum(np.abs(f) ** 2)) * _step(s) * _step(i)
        if not norm2 > 0:
            raise ValueError("JSA amplitude vanishes on the grid")
        f = f / math.sqrt(norm2)
        for arr in (s, i, f):
            arr.setflags(write=False)
        object.__setattr__(self, "signal_axis", s)
        object.__setattr__(self, "idler_axis", i)
        object.__setattr__(self, "amplitude", f)

    @property
    def cell_area(self) -> float:
        return _step(self.signal_axis) * _step(self.idler_axis)

    @property
    def is_square(self) -> bool:
        return self.signal_axis.shape == self.idler_axis.shape and np.array_equal(
            self.signal_axis, self.idler_axis
        )

    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Signal and idler spectra (unit area)."""
        p = self.intensity() * self.cell_area
        return p.sum(axis=1) / _step(self.signal_axis), p.sum(axis=0) / _step(self.idler_axis)


def _step(axis: np.ndarray) -> float:
    return float(axis[1] - axis[0])


def _profile(x, width, profile: PMProfile):
    if profile is PMProfile.SINC:
        return np.sinc(2.0 * SINC2_HALF_WIDTH * np.asarray(x) / width)
    return np.exp(-2.0 * math.log(2.0) * (np.asarray(x) / width) ** 2)


def _ridge_coordinate(pm: PhaseMatchingSpec, ds, di):
    """Signed distance from the PM ridge, scaled to equal ``d`` on ``ds == di == d``."""
    theta = math.radians(pm.orientation_deg)
    n_s, n_i = -math.sin(theta), math.cos(theta)
    return (n_s * ds + n_i * di) / (n_s + n_i)


def pm_amplitude(pm: PhaseMatchingSpec, signal, idler) -> np.ndarray:
    """Phase-matching amplitude at (broadcast) signal/idler wavelengths."""
    ds = np.asarray(signal, dtype=float) - pm.center_wavelength
    di = np.asarray(idler, dtype=float) - pm.center_wavelength
    return _profile(_ridge_coordinate(pm, ds, di), pm.fwhm, pm.profile)


def shg_curve(pm: PhaseMatchingSpec, wavelength_axis) -> ShgCurve:
    """SHG tuning curve of a poled waveguide and the fit of its peak and FWHM.

    Along ``ls == li`` the SHG power follows ``|PM|^2``; a profile of the same
    family is then least-squares fitted to recover centre and width.
    """
    lam = np.asarray(wavelength_axis, dtype=float)
    if lam.ndim != 1 or lam.size < 16 or np.any(np.diff(lam) <= 0):
        raise ValueError("wavelength_axis must be increasing with at least 16 samples")
    if not lam[0] < pm.center_wavelength < lam[-1]:
        raise ValueError("wavelength_axis does not cover the phase-matching peak")
    intensity = np.abs(pm_amplitude(pm, lam, lam)) ** 2
    intensity = intensity / intensity.max()

    def model(x, amp, center, width):
        return amp * np.abs(_profile(x - center, width, pm.profile)) ** 2

    guess = (1.0, float(lam[np.argmax(intensity)]), fwhm(lam, intensity))
    popt, _ = curve_fit(model, lam, intensity, p0=guess)
    return ShgCurve(lam, intensity, float(popt[1]), abs(float(popt[2])))


def curve_overlap(a: ShgCurve, b: ShgCurve, metric: str = "amplitude") -> float:
    """Normalized overlap of two tuning curves sampled on one axis.

    ``metric="amplitude"`` integrates ``sqrt(Ia*Ib)`` against
    ``sqrt(int Ia * int Ib)``; ``"intensity"`` uses ``Ia*Ib`` against
    ``sqrt(int Ia^2 * int Ib^2)``.
    """
    if a.wavelength_axis.shape != b.wavelength_axis.shape or not np.allclose(
        a.wavelength_axis, b.wavelength_axis, rtol=0, atol=1e-12
    ):
        raise ValueError("curves must share a wavelength axis")
    x = a.wavelength_axis
    ia, ib = np.clip(a.intensity, 0, None), np.clip(b.intensity, 0, None)
    if metric == "amplitude":
        num = trapezoid(np.sqrt(ia * ib), x)
        den = math.sqrt(trapezoid(ia, x) * trapezoid(ib, x))
    elif metric == "intensity":
        num = trapezoid(ia * ib, x)
        den = math.sqrt(trapezoid(ia ** 2, x) * trapezoid(ib ** 2, x))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    if den == 0:
        return 0.0
    return float(min(max(num / den, 0.0), 1.0))


def pump_wavelength(signal, idler):
    """Pump wavelength fixed by energy conservation, 1/(1/ls + 1/li)."""
    s = np.asarray(signal, dtype=float)
    i = np.asarray(idler, dtype=float)
    return s * i / (s + i)


def _pump_profile(pump: PumpConfig, lp):
    # amplitude envelope whose FWHM is the configured pump width
    width = pump.envelope_fwhm
    return np.exp(-4.0 * math.log(2.0) * ((lp - pump.center_wavelength) / width) ** 2)


def pump_envelope(pump: PumpConfig, signal_axis, idler_axis) -> np.ndarray:
    """Pump spectral amplitude on the (signal, idler) grid, peak value 1.

    Point-sampled; the value depends on (ls, li) only through the pump
    wavelength they imply.
    """
    s = np.asarray(signal_axis, dtype=float)[:, None]
    i = np.asarray(idler_axis, dtype=float)[None, :]
    return _pump_profile(pump, pump_wavelength(s, i))


def _cell_averaged_envelope(pump: PumpConfig, s_axis: np.ndarray, i_axis: np.ndarray) -> np.ndarray:
    """Amplitude whose square is the pump intensity averaged over each grid cell.

    Used for a pump ridge narrower than the grid step.  Within one cell the
    pump wavelength is linear in (ls, li), so the average of a Gaussian over
    the cell has a closed form in terms of erf.
    """
    s = s_axis[:, None]
    i = i_axis[None, :]
    hs, hi = _step(s_axis), _step(i_axis)
    tot = s + i
    lp = s * i / tot
    a = (i / tot) ** 2 * hs
    b = (s / tot) ** 2 * hi
    # intensity |alpha|^2 = exp(-t^2 / (2 sig^2))
    sig = pump.envelope_fwhm / (4.0 * math.sqrt(math.log(2.0)))
    c = lp - pump.center_wavelength
    k = 1.0 / (math.sqrt(2.0) * sig)

    def g2(t):
        z = t * k
        return z * erf(z) + np.exp(-z * z) / math.sqrt(math.pi)

    total = (
        g2(c + (a + b) / 2)
        - g2(c + (a - b) / 2)
        - g2(c - (a - b) / 2)
        + g2(c - (a + b) / 2)
    )
    avg = sig * sig * math.sqrt(math.pi) * total / (a * b)
    return np.sqrt(np.clip(avg, 0.0, None))


def build_jsa(pm: PhaseMatchingSpec, pump: PumpConfig, grid: GridSpec | None = None) -> JsaGrid:
    """JSA = PM amplitude x pump envelope, normalized on a square grid.

    Raises
    ------
    ResolutionError
        If the PM width, or a pulsed pump width, spans fewer than
        ``MIN_SAMPLES_PER_FWHM`` grid steps.  A CW pump narrower than the
        step is represented by its cell-averaged intensity instead.
    """
    if grid is None:
        grid = GridSpec(center=pm.center_wavelength)
    axis = grid.axis()
    h = grid.step
    if pm.fwhm / h < MIN_SAMPLES_PER_FWHM:
        raise ResolutionError(
            f"grid step {h:.4g} nm gives {pm.fwhm / h:.1f} samples per PM FWHM "
            f"(need {MIN_SAMPLES_PER_FWHM})"
        )
    # pump FWHM seen along the degenerate diagonal: d(lp) = d/2 there
    pump_diag_fwhm = 2.0 * pump.envelope_fwhm
    resolved = pump_diag_fwhm / h >= MIN_SAMPLES_PER_FWHM
    if not resolved and pump.regime is PumpRegime.PULSED:
        raise ResolutionError(
            f"grid step {h:.4g} nm gives {pump_diag_fwhm / h:.1f} samples per pump FWHM "
            f"(need {MIN_SAMPLES_PER_FWHM})"
        )
    if resolved:
        env = pump_envelope(pump, axis, axis)
    else:
        env = _cell_averaged_envelope(pump, axis, axis)
    f = pm_amplitude(pm, axis[:, None], axis[None, :]) * env
    return JsaGrid(axis, axis, f)


def exchange_overlap(jsa: JsaGrid, metric: str = "amplitude") -> float:
    """Overlap between the JSA and its mirror image under signal <-> idler.

    ``"amplitude"``: ``|sum f(s,i) f*(i,s)| dA``.  ``"intensity"``: the same
    for ``|f|^2`` normalized by ``sum |f|^4``.
    """
    if not jsa.is_square:
        raise ValueError("exchange overlap needs identical signal and idler axes")
    f = jsa.amplitude
    if metric == "amplitude":
        value = abs(np.sum(f * np.conj(f.T))) * jsa.cell_area
    elif metric == "intensity":
        p = np.abs(f) ** 2
        value = np.sum(p * p.T) / np.sum(p * p)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return float(min(value, 1.0))


def jsa_overlap(a: JsaGrid, b: JsaGrid) -> float:
    """``|<a|b>|`` for two JSAs on the same grid."""
    if not (np.array_equal(a.signal_axis, b.signal_axis) and np.array_equal(a.idler_axis, b.idler_axis)):
        raise ValueError("JSAs must share their grid")
    return float(min(abs(np.sum(np.conj(a.amplitude) * b.amplitude)) * a.cell_area, 1.0))


def filter_amplitude(spec: FilterSpec, wavelength) -> np.ndarray:
    x = np.asarray(wavelength, dtype=float) - spec.center_wavelength
    if spec.shape is FilterShape.RECTANGULAR:
        return (np.abs(x) <= spec.bandwidth_fwhm / 2.0).astype(float)
    return np.exp(-2.0 * math.log(2.0) * (x / spec.bandwidth_fwhm) ** 2)


def apply_filter(jsa: JsaGrid, filter_s: FilterSpec, filter_i: FilterSpec) -> tuple[JsaGrid, float]:
    """Pass signal and idler through amplitude filters.

    Returns the renormalized JSA and the pair transmission, i.e. the
    fraction of ``|f|^2`` that survives both filters.
    """
    for name, spec, axis in (("signal", filter_s, jsa.signal_axis), ("idler", filter_i, jsa.idler_axis)):
        if not axis[0] <= spec.center_wavelength <= axis[-1]:
            raise ValueError(f"{name} filter centre {spec.center_wavelength} nm lies outside the grid")
    ts = filter_amplitude(filter_s, jsa.signal_axis)
    ti = filter_amplitude(filter_i, jsa.idler_axis)
    f = jsa.amplitude * ts[:, None] * ti[None, :]
    transmission = float(np.sum(np.abs(f) ** 2) * jsa.cell_area)
    if transmission <= 0:
        raise ValueError("filters block the whole JSA")
    return JsaGrid(jsa.signal_axis, jsa.idler_axis, f), min(transmission, 1.0)


def principal_axis_angle(jsa: JsaGrid) -> float:
    """Orientation (deg, in (-90, 90]) of the major axis of ``|f|^2``."""
    w = jsa.intensity()
    w = w / w.sum()
    s = jsa.signal_axis[:, None]
    i = jsa.idler_axis[None, :]
    ms, mi = np.sum(w * s), np.sum(w * i)
    ds, di = s - ms, i - mi
    cov = np.array(
        [
            [np.sum(w * ds * ds), np.sum(w * ds * di)],
            [np.sum(w * ds * di), np.sum(w * di * di)],
        ]
    )
    vals, vecs = np.linalg.eigh(cov)
    v = vecs[:, np.argmax(vals)]
    angle = math.degrees(math.atan2(v[1], v[0]))
    if angle <= -90.0:
        angle += 180.0
    elif angle > 90.0:
        angle -= 180.0
    return angle


def schmidt_number(jsa: JsaGrid) -> float:
    sv = np.linalg.svd(jsa.amplitude * math.sqrt(jsa.cell_area), compute_uv=False)
    lam = sv ** 2 / np.sum(sv ** 2)
    return float(1.0 / np.sum(lam ** 2))


def fwhm(x, y) -> float:
    """FWHM of a single-peaked sampled curve, with linear interpolation at the edges."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = int(np.argmax(y))
    half = y[k] / 2.0
    left = k
    while left > 0 and y[left - 1] > half:
        left -= 1
    right = k
    while right < y.size - 1 and y[right + 1] > half:
        right += 1
    if left == 0 or right == y.size - 1:
        raise ValueError("curve does not fall below half maximum inside the axis")
    xl = np.interp(half, [y[left - 1], y[left]], [x[left - 1], x[left]])
    xr = np.interp(half, [y[right + 1], y[right]], [x[right + 1], x[right]])
    return float(xr - xl)


def jsa_to_csv(jsa: JsaGrid) -> str:
    """Two header rows (signal then idler axis), then one row per signal
    sample holding (real, imag) pairs over the idler axis."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["signal_nm"] + [repr(float(v)) for v in jsa.signal_axis])
    w.writerow(["idler_nm"] + [repr(float(v)) for v in jsa.idler_axis])
    for row in jsa.amplitude:
        out = []
        for z in row:
            out.append(repr(float(z.real)))
            out.append(repr(float(z.imag)))
        w.writerow(out)
    return buf.getvalue()


def jsa_from_csv(text: str) -> JsaGrid:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 3 or rows[0][0] != "signal_nm" or rows[1][0] != "idler_nm":
        raise ValueError("not a JSA CSV: expected 'signal_nm' and 'idler_nm' header rows")
    s = np.array(rows[0][1:], dtype=float)
    i = np.array(rows[1][1:], dtype=float)
    data = np.array(rows[2:], dtype=float)
    if data.shape != (s.size, 2 * i.size):
        raise ValueError("JSA CSV body does not match its axes")
    f = data[:, 0::2] + 1j * data[:, 1::2]
    return JsaGrid(s, i, f)
