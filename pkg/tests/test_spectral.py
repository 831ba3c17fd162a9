import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from entsource.polarization import PumpConfig
from entsource.spectral import (
    SINC2_HALF_WIDTH,
    FilterSpec,
    GridSpec,
    JsaGrid,
    PhaseMatchingSpec,
    ResolutionError,
    apply_filter,
    build_jsa,
    curve_overlap,
    exchange_overlap,
    fwhm,
    jsa_from_csv,
    jsa_overlap,
    jsa_to_csv,
    pm_amplitude,
    principal_axis_angle,
    pump_wavelength,
    schmidt_number,
    shg_curve,
)

CENTER = 1554.44
PULSED = PumpConfig(bandwidth_fwhm=0.3, regime="pulsed")
CW = PumpConfig()


def sinc_half_width():
    return brentq(lambda u: np.sinc(u) ** 2 - 0.5, 0.1, 0.9)


def oracle_exchange(points, half=4.0, bw=0.3, pm_fwhm=0.3325, theta=-33.5, filter_bw=None):
    """Exchange overlap coded from scratch on a meshgrid."""
    k = sinc_half_width()
    lam = CENTER + np.linspace(-half, half, points)
    s, i = np.meshgrid(lam, lam, indexing="ij")
    th = math.radians(theta)
    a, b = -math.sin(th), math.cos(th)
    x = (a * (s - CENTER) + b * (i - CENTER)) / (a + b)
    lp = 1.0 / (1.0 / s + 1.0 / i)
    f = np.sinc(2 * k * x / pm_fwhm) * np.exp(-4 * math.log(2) * ((lp - 777.22) / bw) ** 2)
    if filter_bw is not None:
        m = (np.abs(lam - CENTER) <= filter_bw / 2).astype(float)
        f = f * m[:, None] * m[None, :]
    return abs(np.sum(f * f.T.conj())) / np.sum(np.abs(f) ** 2)


@pytest.fixture(scope="module")
def pulsed_jsa():
    return build_jsa(PhaseMatchingSpec(), PULSED)


@pytest.fixture(scope="module")
def cw_jsa():
    return build_jsa(PhaseMatchingSpec(), CW)


# ------------------------------------------------------------ PM and SHG


def test_sinc_half_width_constant():
    assert SINC2_HALF_WIDTH == pytest.approx(sinc_half_width(), abs=1e-11)


@pytest.mark.parametrize("profile", ["sinc_squared_amplitude", "gaussian"])
def test_pm_intensity_fwhm_along_diagonal(profile):
    pm = PhaseMatchingSpec(fwhm=0.306, profile=profile)
    lam = np.linspace(CENTER - 2, CENTER + 2, 40001)
    assert fwhm(lam, np.abs(pm_amplitude(pm, lam, lam)) ** 2) == pytest.approx(0.306, abs=1e-4)


@pytest.mark.parametrize("width", [0.306, 0.359])
def test_shg_fit_recovers_fwhm(width):
    axis = np.linspace(CENTER - 5, CENTER + 5, 20001)
    curve = shg_curve(PhaseMatchingSpec(fwhm=width), axis)
    assert abs(curve.fitted_fwhm - width) <= 0.005
    assert curve.fitted_center == pytest.approx(CENTER, abs=1e-6)


def test_shg_overlap_matches_quad_oracle():
    k = sinc_half_width()
    half = 15 * 0.359

    def i(x, w):
        return np.sinc(2 * k * x / w) ** 2

    pts = np.linspace(-half, half, 200)
    kw = dict(limit=2000, points=pts)
    num = quad(lambda x: math.sqrt(i(x, 0.306) * i(x, 0.359)), -half, half, **kw)[0]
    den = math.sqrt(quad(lambda x: i(x, 0.306), -half, half, **kw)[0]
                    * quad(lambda x: i(x, 0.359), -half, half, **kw)[0])
    oracle = num / den
    assert oracle == pytest.approx(0.9717971260302961, abs=1e-9)  # frozen

    axis = np.linspace(CENTER - half, CENTER + half, 20001)
    a = shg_curve(PhaseMatchingSpec(fwhm=0.306), axis)
    b = shg_curve(PhaseMatchingSpec(fwhm=0.359), axis)
    got = curve_overlap(a, b)
    assert got == pytest.approx(oracle, abs=1e-6)
    assert abs(got - 0.97) <= 0.02
    assert curve_overlap(a, b, "intensity") == pytest.approx(0.9913880099574318, abs=1e-6)


def test_curve_overlap_self_is_one():
    axis = np.linspace(CENTER - 3, CENTER + 3, 2001)
    a = shg_curve(PhaseMatchingSpec(fwhm=0.306), axis)
    assert curve_overlap(a, a) == pytest.approx(1.0, abs=1e-12)


def test_shg_axis_must_cover_peak():
    with pytest.raises(ValueError):
        shg_curve(PhaseMatchingSpec(), np.linspace(1556, 1560, 100))


def test_curve_overlap_needs_shared_axis():
    a = shg_curve(PhaseMatchingSpec(), np.linspace(CENTER - 3, CENTER + 3, 1001))
    b = shg_curve(PhaseMatchingSpec(), np.linspace(CENTER - 3, CENTER + 3, 1002))
    with pytest.raises(ValueError):
        curve_overlap(a, b)


@pytest.mark.parametrize("orientation", [0.0, 10.0, -91.0])
def test_orientation_range(orientation):
    with pytest.raises(ValueError):
        PhaseMatchingSpec(orientation_deg=orientation)


# ----------------------------------------------------------------- JSA


def test_jsa_is_normalized(pulsed_jsa, cw_jsa):
    for j in (pulsed_jsa, cw_jsa):
        assert np.sum(j.intensity()) * j.cell_area == pytest.approx(1.0, abs=1e-12)


def test_pulsed_exchange_overlap_matches_oracle(pulsed_jsa):
    got = exchange_overlap(pulsed_jsa)
    oracle = oracle_exchange(1024)
    assert oracle == pytest.approx(0.43601692012776105, abs=1e-9)  # frozen
    assert got == pytest.approx(oracle, abs=1e-9)
    assert abs(got - 0.44) <= 0.08


def test_pulsed_overlap_grid_convergence(pulsed_jsa):
    fine = build_jsa(PhaseMatchingSpec(), PULSED, GridSpec(points=2048))
    assert abs(exchange_overlap(fine) - exchange_overlap(pulsed_jsa)) < 1e-3
    assert exchange_overlap(fine) == pytest.approx(0.43605541148176924, abs=1e-9)  # frozen oracle


def test_filters_restore_symmetry(pulsed_jsa):
    filtered, transmission = apply_filter(pulsed_jsa, FilterSpec(), FilterSpec())
    got = exchange_overlap(filtered)
    assert got >= 0.95
    assert got == pytest.approx(oracle_exchange(1024, filter_bw=0.25), abs=1e-9)
    assert 0 < transmission < 0.1


def test_filter_bandwidth_monotonicity(pulsed_jsa):
    overlaps, transmissions = [], []
    for bw in (3.0, 1.0, 0.5, 0.25, 0.1):
        f, t = apply_filter(pulsed_jsa, FilterSpec(bandwidth_fwhm=bw), FilterSpec(bandwidth_fwhm=bw))
        overlaps.append(exchange_overlap(f))
        transmissions.append(t)
    assert np.all(np.diff(overlaps) >= -1e-12)
    assert np.all(np.diff(transmissions) <= 1e-12)


def test_gaussian_filters_also_help(pulsed_jsa):
    g = FilterSpec(bandwidth_fwhm=0.25, shape="gaussian")
    assert exchange_overlap(apply_filter(pulsed_jsa, g, g)[0]) > exchange_overlap(pulsed_jsa)


def test_filter_outside_grid_rejected(pulsed_jsa):
    with pytest.raises(ValueError, match="outside"):
        apply_filter(pulsed_jsa, FilterSpec(center_wavelength=1600.0), FilterSpec())


def test_cw_overlap_and_axis(cw_jsa):
    assert exchange_overlap(cw_jsa) >= 0.99
    assert principal_axis_angle(cw_jsa) == pytest.approx(-45.0, abs=0.5)


def test_pulsed_axis_follows_phase_matching(pulsed_jsa):
    angle = principal_axis_angle(pulsed_jsa)
    assert -45.0 <= angle <= -33.5


def test_cw_energy_conservation(cw_jsa):
    """CW weight sits on the line of fixed pump wavelength, within one cell."""
    s = cw_jsa.signal_axis[:, None]
    i = cw_jsa.idler_axis[None, :]
    lp = pump_wavelength(s, i)
    w = cw_jsa.intensity() / cw_jsa.intensity().sum()
    rms = math.sqrt(np.sum(w * (lp - 777.22) ** 2))
    step = cw_jsa.signal_axis[1] - cw_jsa.signal_axis[0]
    assert rms < step / 2


def test_separable_sanity():
    pm = PhaseMatchingSpec(orientation_deg=-90.0)
    broad = PumpConfig(bandwidth_fwhm=1000.0, regime="pulsed")
    jsa = build_jsa(pm, broad, GridSpec(points=256))
    assert schmidt_number(jsa) == pytest.approx(1.0, abs=1e-6)


def test_entangled_cw_has_large_schmidt_number(cw_jsa):
    assert schmidt_number(cw_jsa) > 10


def test_resolution_error_for_coarse_pm():
    with pytest.raises(ResolutionError):
        build_jsa(PhaseMatchingSpec(), CW, GridSpec(points=64))


def test_resolution_error_for_narrow_pulse():
    narrow = PumpConfig(bandwidth_fwhm=0.01, regime="pulsed")
    with pytest.raises(ResolutionError):
        build_jsa(PhaseMatchingSpec(), narrow)


def test_jsa_overlap_self(pulsed_jsa):
    assert jsa_overlap(pulsed_jsa, pulsed_jsa) == pytest.approx(1.0, abs=1e-12)


def test_jsa_grid_rejects_bad_axes():
    ax = np.linspace(0, 1, 64)
    with pytest.raises(ValueError):
        JsaGrid(ax, ax[::-1], np.ones((64, 64)))
    with pytest.raises(ValueError):
        JsaGrid(ax[:32], ax[:32], np.ones((32, 32)))


def test_jsa_csv_round_trip():
    jsa = build_jsa(PhaseMatchingSpec(), PULSED, GridSpec(points=128, half_span=0.5))
    back = jsa_from_csv(jsa_to_csv(jsa))
    np.testing.assert_array_equal(back.signal_axis, jsa.signal_axis)
    np.testing.assert_allclose(back.amplitude, jsa.amplitude, rtol=0, atol=1e-15)


def test_jsa_is_read_only(pulsed_jsa):
    with pytest.raises(ValueError):
        pulsed_jsa.amplitude[0, 0] = 1.0


def test_fwhm_of_gaussian():
    x = np.linspace(-5, 5, 10001)
    y = np.exp(-4 * math.log(2) * (x / 1.3) ** 2)
    assert fwhm(x, y) == pytest.approx(1.3, abs=1e-6)
