"""Named, seeded scenarios that regenerate the published figures and numbers.

Each scenario computes a set of named values, writes its tables to its own
output directory and compares the values against the reference manifest
shipped in ``data/reference_values.json``.  Rows of kind ``report`` are
listed for comparison only; every other row is a pass/fail check.

Wall-clock timings are kept apart in ``timing.json`` so that every CSV and
``metrics.json`` is byte-identical for a given config and seed.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .config import SourceConfig, apply_overrides, default_config, validate_config
from .pipeline import predict_state, shg_axis
from .polarization import (
    PumpRegime,
    bell_projection_probability,
    output_state,
    probability_surface,
)
from .spectral import (
    FilterSpec,
    JsaGrid,
    PhaseMatchingSpec,
    apply_filter,
    build_jsa,
    curve_overlap,
    exchange_overlap,
    jsa_to_csv,
    principal_axis_angle,
    shg_curve,
)
from .states import (
    DensityMatrix2Q,
    bell_state,
    chsh_fixed,
    chsh_optimal,
    density_matrix_to_csv,
    fidelity,
    random_density_matrix,
    werner_chsh_from_fidelity,
    werner_state,
)
from .temporal import (
    budget_to_csv,
    compensation_fiber_length,
    effective_length,
    residual_delay,
    walkoff_budget,
    walkoff_delay,
)
from .tomography import (
    MeasurementRecord,
    chsh_from_records,
    chsh_settings,
    error_bars,
    expected_counts,
    log_likelihood,
    records_to_csv,
    simulate_counts,
    tomography_linear,
    tomography_mle,
    tomography_settings,
)

__all__ = [
    "SCENARIO_NAMES",
    "UnknownScenarioError",
    "CheckRow",
    "ScenarioResult",
    "load_manifest",
    "run_scenario",
    "property_checks",
]

PULSED_FALLBACK_BANDWIDTH_NM = 0.3
DEFAULT_FILTER_BANDWIDTH_NM = 0.25
SURFACE_POINTS = 50
BOOTSTRAP_TRIALS = 100
JSA_EXPORT_HALF_SPAN_NM = 1.0


class UnknownScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class CheckRow:
    id: str
    scenario: str
    label: str
    kind: str
    computed: object
    reference: object
    tolerance: float | None
    status: str  # "pass", "fail" or "report"


@dataclass
class ScenarioResult:
    name: str
    values: dict
    rows: list[CheckRow]
    timing: dict
    timing_ok: bool
    out_dir: Path | None = None

    @property
    def passed(self) -> bool:
        return self.timing_ok and all(r.status != "fail" for r in self.rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.rows if r.status == "fail"]


@dataclass
class _Context:
    config: SourceConfig
    seed: int
    mean_total: float


@dataclass
class _Output:
    values: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# manifest


def load_manifest() -> dict:
    text = resources.files("entsource").joinpath("data/reference_values.json").read_text()
    return json.loads(text)


def _evaluate(row: dict, computed) -> CheckRow:
    kind = row["kind"]
    ref = row.get("reference")
    tol = row.get("tolerance")
    if kind == "report":
        status = "report"
    elif kind == "abs":
        status = "pass" if abs(computed - ref) <= tol else "fail"
    elif kind == "min":
        status = "pass" if computed >= ref else "fail"
    elif kind == "max":
        status = "pass" if computed <= ref else "fail"
    elif kind == "range":
        status = "pass" if ref[0] <= computed <= ref[1] else "fail"
    elif kind == "flag":
        status = "pass" if computed is ref else "fail"
    else:
        raise ValueError(f"unknown manifest kind {kind!r}")
    return CheckRow(row["id"], row["scenario"], row["label"], kind, computed, ref, tol, status)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "[" + ";".join(_fmt(v) for v in value) + "]"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "scenario", "label", "kind", "computed", "reference", "tolerance", "status"])
    for r in rows:
        w.writerow([r.id, r.scenario, r.label, r.kind, _fmt(r.computed), _fmt(r.reference),
                    _fmt(r.tolerance), r.status])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _dump_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# config variants


def _default_filters(config: SourceConfig) -> tuple[FilterSpec, FilterSpec]:
    c = config.pm_wg1.center_wavelength
    f = FilterSpec(center_wavelength=c, bandwidth_fwhm=DEFAULT_FILTER_BANDWIDTH_NM)
    return f, f


def _pulsed(config: SourceConfig, filtered: bool) -> SourceConfig:
    pump = config.pump
    if pump.regime is PumpRegime.CW:
        pump = dataclasses.replace(pump, regime=PumpRegime.PULSED,
                                   bandwidth_fwhm=PULSED_FALLBACK_BANDWIDTH_NM)
    filters = None
    if filtered:
        filters = config.filters if config.filters is not None else _default_filters(config)
    return dataclasses.replace(config, pump=pump, filters=filters)


def _cw(config: SourceConfig) -> SourceConfig:
    pump = dataclasses.replace(config.pump, regime=PumpRegime.CW, bandwidth_fwhm=0.0)
    return dataclasses.replace(config, pump=pump, filters=None)


def _mean_pm(config: SourceConfig) -> PhaseMatchingSpec:
    """A single PM function with the two waveguides' mean bandwidth."""
    return dataclasses.replace(
        config.pm_wg1, fwhm=0.5 * (config.pm_wg1.fwhm + config.pm_wg2.fwhm)
    )


def _crop(jsa: JsaGrid, half_span: float) -> JsaGrid:
    c = 0.5 * (jsa.signal_axis[0] + jsa.signal_axis[-1])
    keep = np.abs(jsa.signal_axis - c) <= half_span + 1e-12
    if keep.sum() < 64:
        return jsa
    return JsaGrid(jsa.signal_axis[keep], jsa.idler_axis[keep], jsa.amplitude[np.ix_(keep, keep)])


# ---------------------------------------------------------------------------
# scenarios


def _splitter_sweep(ctx: _Context) -> _Output:
    out = _Output()
    sp = ctx.config.splitter
    t0 = time.perf_counter()
    pump0 = dataclasses.replace(ctx.config.pump, phase=0.0, weight_1=1.0, weight_2=1.0)
    pump_pi = dataclasses.replace(pump0, phase=math.pi)
    p_minus = bell_projection_probability(output_state(pump0, sp), "psi-")
    p_plus = bell_projection_probability(output_state(pump_pi, sp), "psi+")
    out.timing["singlet_probability_runtime_s"] = time.perf_counter() - t0

    t_h = np.linspace(0.5, 1.0, SURFACE_POINTS)
    t_v = np.linspace(0.0, 0.5, SURFACE_POINTS)
    s0 = probability_surface(t_h, t_v, 0.0, "psi-")
    spi = probability_surface(t_h, t_v, math.pi, "psi+")
    inner = (t_h[:, None] < 1.0) & (t_v[None, :] > 0.0)
    violations = int(np.sum(inner & ~(s0 < spi)))

    out.values.update(
        singlet_probability=p_minus,
        triplet_probability=p_plus,
        ideal_splitter_probability=min(s0[-1, 0], spi[-1, 0]),
        surface_decay_violations=violations,
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_h", "t_v", "p_psi_minus_phase_0", "p_psi_plus_phase_pi"])
    for i, th in enumerate(t_h):
        for j, tv in enumerate(t_v):
            w.writerow([repr(float(th)), repr(float(tv)), repr(float(s0[i, j])), repr(float(spi[i, j]))])
    out.files["surfaces.csv"] = buf.getvalue()
    return out


def _walkoff_budget(ctx: _Context) -> _Output:
    out = _Output()
    spec = ctx.config.walkoff
    delay = walkoff_delay(spec)
    fiber = compensation_fiber_length(delay, spec.fiber_birefringence)
    configured = residual_delay(spec, ctx.config.fiber_length_m)
    budget = walkoff_budget(spec, ctx.config.fiber_length_m)
    out.values.update(
        effective_length_mm=effective_length(spec),
        walkoff_delay_ps=delay,
        compensation_fiber_length_m=fiber,
        round_trip_residual_ps=residual_delay(spec, fiber),
        configured_residual_ps=configured,
        temporal_factor=dict((k, v) for k, v, _ in budget)["residual_indistinguishability"],
    )
    out.files["budget.csv"] = budget_to_csv(budget)
    return out


def _shg_overlap(ctx: _Context) -> _Output:
    out = _Output()
    axis = shg_axis(ctx.config)
    c1 = shg_curve(ctx.config.pm_wg1, axis)
    c2 = shg_curve(ctx.config.pm_wg2, axis)
    out.values.update(
        shg_fwhm_wg1_nm=c1.fitted_fwhm,
        shg_fwhm_wg2_nm=c2.fitted_fwhm,
        shg_curve_overlap=curve_overlap(c1, c2, "amplitude"),
        shg_intensity_overlap=curve_overlap(c1, c2, "intensity"),
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fundamental_nm", "shg_wg1", "shg_wg2"])
    for x, a, b in zip(axis[::10], c1.intensity[::10], c2.intensity[::10]):
        w.writerow([repr(float(x)), repr(float(a)), repr(float(b))])
    out.files["shg_curves.csv"] = buf.getvalue()
    return out


def _jsa_pulsed(ctx: _Context) -> _Output:
    out = _Output()
    cfg = _pulsed(ctx.config, filtered=True)
    pm = _mean_pm(cfg)
    t0 = time.perf_counter()
    jsa = build_jsa(pm, cfg.pump, cfg.grid)
    overlap = exchange_overlap(jsa)
    out.timing["jsa_pulsed_runtime_s"] = time.perf_counter() - t0

    fine = dataclasses.replace(cfg.grid, points=2 * cfg.grid.points)
    overlap_fine = exchange_overlap(build_jsa(pm, cfg.pump, fine))
    filtered, transmission = apply_filter(jsa, *cfg.filters)
    out.values.update(
        pulsed_exchange_overlap=overlap,
        pulsed_exchange_overlap_fine=overlap_fine,
        pulsed_grid_convergence=abs(overlap_fine - overlap),
        pulsed_principal_axis_deg=principal_axis_angle(jsa),
        filtered_exchange_overlap=exchange_overlap(filtered),
        filtered_pair_transmission=transmission,
    )
    out.files["jsa_pulsed.csv"] = jsa_to_csv(_crop(jsa, JSA_EXPORT_HALF_SPAN_NM))
    out.files["jsa_pulsed_filtered.csv"] = jsa_to_csv(_crop(filtered, JSA_EXPORT_HALF_SPAN_NM))
    return out


def _jsa_cw(ctx: _Context) -> _Output:
    out = _Output()
    cfg = _cw(ctx.config)
    jsa = build_jsa(_mean_pm(cfg), cfg.pump, cfg.grid)
    out.values.update(
        cw_exchange_overlap=exchange_overlap(jsa),
        cw_principal_axis_deg=principal_axis_angle(jsa),
    )
    out.files["jsa_cw.csv"] = jsa_to_csv(_crop(jsa, JSA_EXPORT_HALF_SPAN_NM))
    return out


def _tomography(ctx: _Context, cfg: SourceConfig, out: _Output, tag: str, bootstrap: bool = True):
    det = cfg.detection
    pred = predict_state(cfg)
    mean_total = ctx.mean_total * det.efficiency ** 2
    records = simulate_counts(pred.rho, tomography_settings("16"), mean_total, ctx.seed,
                              det.integration_seconds, det.background_rate)
    linear = tomography_linear(records, background_rate=det.background_rate)
    mle = tomography_mle(records, background_rate=det.background_rate)
    singlet = bell_state("psi-")
    out.values.update({
        f"predicted_fidelity_{tag}": pred.metrics["fidelity_psi_minus"],
        f"coherence_factor_{tag}": pred.coherence_factor,
        f"reconstructed_fidelity_{tag}": fidelity(mle.rho, singlet),
        f"reconstructed_fidelity_{tag}_linear": fidelity(linear, singlet),
        f"mle_converged_{tag}": mle.converged,
    })
    if bootstrap:
        boot = error_bars(records, "mle", BOOTSTRAP_TRIALS, ctx.seed,
                          background_rate=det.background_rate)
        out.values[f"reconstructed_fidelity_{tag}_std"] = boot.fidelity_std
        out.values[f"reconstructed_chsh_{tag}_std"] = boot.chsh_std
    out.files["predicted_rho.csv"] = density_matrix_to_csv(pred.rho)
    out.files["reconstructed_rho_mle.csv"] = density_matrix_to_csv(mle.rho)
    out.files["reconstructed_rho_linear.csv"] = density_matrix_to_csv(linear)
    out.files["counts.csv"] = records_to_csv(records)
    out.values[f"factors_{tag}"] = pred.factors
    return pred, mle


def _tomography_pulsed(ctx: _Context) -> _Output:
    out = _Output()
    _tomography(ctx, _pulsed(ctx.config, filtered=True), out, "pulsed")
    unfiltered = predict_state(_pulsed(ctx.config, filtered=False))
    out.values["predicted_fidelity_unfiltered"] = unfiltered.metrics["fidelity_psi_minus"]
    out.values["coherence_factor_unfiltered"] = unfiltered.coherence_factor
    return out


def _tomography_cw(ctx: _Context) -> _Output:
    out = _Output()
    _tomography(ctx, _cw(ctx.config), out, "cw")
    return out


def _chsh(ctx: _Context, cfg: SourceConfig, tag: str, f_pub: float, s_pub: float) -> _Output:
    out = _Output()
    det = cfg.detection
    pred, mle = _tomography(ctx, cfg, out, tag, bootstrap=False)
    s_recon = chsh_fixed(mle.rho)
    s_werner = werner_chsh_from_fidelity(pred.metrics["fidelity_psi_minus"])
    chsh_records = simulate_counts(pred.rho, chsh_settings(), ctx.mean_total * det.efficiency ** 2,
                                   [ctx.seed, 1], det.integration_seconds, det.background_rate)
    bound = werner_chsh_from_fidelity(f_pub)
    digits = f"{f_pub:.3f}".replace(".", "")
    out.values.update({
        f"chsh_{tag}_reconstructed": s_recon,
        f"chsh_{tag}_reconstructed_optimal": chsh_optimal(mle.rho),
        f"chsh_{tag}_predicted": pred.metrics["chsh_fixed"],
        f"chsh_{tag}_werner_prediction": s_werner,
        f"chsh_{tag}_werner_gap": abs(s_recon - s_werner),
        f"chsh_{tag}_from_counts": chsh_from_records(chsh_records),
        f"werner_s_opt_at_f_{digits}": bound,
        f"published_s_{tag}_below_bound": bool(s_pub <= bound),
    })
    out.files["chsh_counts.csv"] = records_to_csv(chsh_records)
    return out


def _chsh_pulsed(ctx: _Context) -> _Output:
    return _chsh(ctx, _pulsed(ctx.config, filtered=True), "pulsed", 0.973, 2.694)


def _chsh_cw(ctx: _Context) -> _Output:
    return _chsh(ctx, _cw(ctx.config), "cw", 0.941, 2.597)


def property_checks(seed: int = 0, n_roundtrip: int = 100, n_noisy: int = 500,
                    n_random: int = 1000) -> dict:
    """Estimator and CHSH properties on synthetic states.

    Returns the worst-case values that the manifest bounds.
    """
    settings = tomography_settings("16")

    def physical(rho: DensityMatrix2Q) -> bool:
        return rho.eigenvalues.min() >= -1e-9 and abs(np.trace(rho.elements) - 1) <= 1e-10

    unphysical = 0
    worst_infidelity = 0.0
    rng = np.random.default_rng([seed, 11])
    for _ in range(n_roundtrip):
        state = random_density_matrix(rng, rank=1)
        psi = np.linalg.eigh(state.elements)[1][:, -1]
        lam = expected_counts(state, settings, 1e6)
        records = [MeasurementRecord(s, float(n)) for s, n in zip(settings, lam)]
        for rho in (tomography_linear(records), tomography_mle(records).rho):
            worst_infidelity = max(worst_infidelity, 1.0 - fidelity(rho, psi))
            unphysical += not physical(rho)

    below = 0
    rng = np.random.default_rng([seed, 12])
    for k in range(n_noisy):
        state = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        records = simulate_counts(state, settings, 1000.0, [seed, 12, k])
        lin = tomography_linear(records)
        mle = tomography_mle(records, init=lin).rho
        unphysical += (not physical(lin)) + (not physical(mle))
        if log_likelihood(mle, records) < log_likelihood(lin, records) - 1e-9:
            below += 1

    rng = np.random.default_rng([seed, 13])
    excess = max(
        chsh_optimal(random_density_matrix(rng, rank=int(rng.integers(1, 5))))
        for _ in range(n_random)
    ) - 2.0 * math.sqrt(2.0)

    f_err = s_err = 0.0
    for p in np.linspace(0.0, 1.0, 101):
        w = werner_state(float(p))
        f_err = max(f_err, abs(fidelity(w, bell_state("psi-")) - (1 + 3 * p) / 4))
        s_err = max(s_err, abs(chsh_optimal(w) - 2 * math.sqrt(2) * p))
    return {
        "noiseless_roundtrip_infidelity": worst_infidelity,
        "mle_below_linear_trials": below,
        "unphysical_reconstructions": unphysical,
        "tsirelson_excess": excess,
        "werner_fidelity_error": f_err,
        "werner_chsh_error": s_err,
    }


_SCENARIOS: dict[str, Callable[[_Context], _Output]] = {
    "shg_overlap": _shg_overlap,
    "splitter_sweep": _splitter_sweep,
    "walkoff_budget": _walkoff_budget,
    "jsa_pulsed": _jsa_pulsed,
    "jsa_cw": _jsa_cw,
    "tomography_pulsed": _tomography_pulsed,
    "tomography_cw": _tomography_cw,
    "chsh_pulsed": _chsh_pulsed,
    "chsh_cw": _chsh_cw,
}
SCENARIO_NAMES = tuple(_SCENARIOS) + ("full_paper_table",)


# ---------------------------------------------------------------------------
# runner


def _resolve_config(config, overrides) -> SourceConfig:
    if isinstance(config, SourceConfig):
        if overrides:
            raise ValueError("overrides need a raw config (path, mapping or None)")
        return config
    if config is None:
        raw = default_config()
    elif isinstance(config, dict):
        raw = config
    else:
        raw = json.loads(Path(config).read_text(encoding="utf-8"))
    if overrides:
        raw = apply_overrides(raw, overrides)
    return validate_config(raw)


def _check_rows(scenario: str, values: dict, manifest: dict) -> list[CheckRow]:
    rows = []
    for entry in manifest["rows"]:
        if entry["scenario"] == scenario and entry["id"] in values:
            rows.append(_evaluate(entry, values[entry["id"]]))
    return rows


def _timing_ok(timing: dict, manifest: dict) -> bool:
    limits = {t["id"]: t["limit"] for t in manifest["timing"]}
    return all(timing[k] < limits[k] for k in timing if k in limits)


def _write(out_dir: Path | None, files: dict):
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out_dir / name).write_text(text, encoding="utf-8")


def _run_single(name: str, ctx: _Context, manifest: dict, out_dir: Path | None) -> ScenarioResult:
    t0 = time.perf_counter()
    output = _SCENARIOS[name](ctx)
    output.timing[f"{name}_runtime_s"] = time.perf_counter() - t0
    rows = _check_rows(name, output.values, manifest)
    files = dict(output.files)
    files["metrics.json"] = _dump_json(output.values)
    files["summary.csv"] = summary_csv(rows)
    files["timing.json"] = _dump_json(output.timing)
    _write(out_dir, files)
    return ScenarioResult(name, output.values, rows, output.timing,
                          _timing_ok(output.timing, manifest), out_dir)


def run_scenario(name: str, config=None, out_dir=None, seed: int | None = None,
                 mean_total: float | None = None, overrides: dict | None = None) -> ScenarioResult:
    """Run one scenario and write its bundle under ``out_dir / name``.

    ``config`` may be a :class:`SourceConfig`, a raw mapping, a path to a
    JSON file or ``None`` for the shipped default.  ``overrides`` maps dotted
    raw-config paths to replacement values.  ``seed`` and ``mean_total``
    default to the config's detection section.
    """
    if name not in SCENARIO_NAMES:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; valid names: {', '.join(SCENARIO_NAMES)}"
        )
    cfg = _resolve_config(config, overrides)
    ctx = _Context(
        config=cfg,
        seed=cfg.detection.seed if seed is None else int(seed),
        mean_total=cfg.detection.mean_total if mean_total is None else float(mean_total),
    )
    if not ctx.mean_total > 0:
        raise ValueError("mean_total must be positive")
    manifest = load_manifest()
    base = None if out_dir is None else Path(out_dir) / name
    if name != "full_paper_table":
        return _run_single(name, ctx, manifest, base)

    t0 = time.perf_counter()
    values: dict = {}
    rows: list[CheckRow] = []
    timing: dict = {}
    timing_ok = True
    for sub in _SCENARIOS:
        res = _run_single(sub, ctx, manifest, None if base is None else base / sub)
        values[sub] = res.values
        rows.extend(res.rows)
        timing.update(res.timing)
        timing_ok &= res.timing_ok
    t1 = time.perf_counter()
    props = property_checks(ctx.seed)
    timing["property_checks_runtime_s"] = time.perf_counter() - t1
    values["properties"] = props
    rows.extend(_check_rows(name, props, manifest))
    timing["full_paper_table_runtime_s"] = time.perf_counter() - t0
    timing_ok &= _timing_ok(timing, manifest)
    _write(base, {
        "metrics.json": _dump_json(values),
        "summary.csv": summary_csv(rows),
        "timing.json": _dump_json(timing),
    })
    return ScenarioResult(name, values, rows, timing, timing_ok, base)
