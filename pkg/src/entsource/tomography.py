"""Coincidence-count forward model and two-qubit state reconstruction.

Counts for a setting with projector ``P`` are modelled as Poisson with mean
``N tr(rho P) + b T``, where ``N`` is the overall coincidence scale
(``mean_total``), ``b`` an accidental background rate and ``T`` the
integration time.

Two estimators are provided.  Linear inversion solves the linear model
for the 16 two-qubit Stokes parameters by least squares and then clips the
result back into the set of states.  Maximum likelihood parametrizes
``N rho = L L^dagger`` with ``L`` lower triangular (16 real parameters) and
maximizes the Poisson log-likelihood.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import gammaln

from .states import (
    DEFAULT_CHSH_ANGLES,
    PAULI,
    DensityMatrix2Q,
    MeasurementSetting,
    bell_state,
    chsh_fixed,
    fidelity,
)

__all__ = [
    "MeasurementRecord",
    "TomographyResult",
    "BootstrapResult",
    "InformationalCompletenessError",
    "tomography_settings",
    "expected_counts",
    "simulate_counts",
    "tomography_linear",
    "tomography_mle",
    "log_likelihood",
    "error_bars",
    "chsh_settings",
    "chsh_from_records",
    "records_to_csv",
    "records_from_csv",
]


class InformationalCompletenessError(ValueError):
    """The measured settings do not determine a two-qubit state."""


@dataclass(frozen=True)
class MeasurementRecord:
    setting: MeasurementSetting
    counts: int
    integration_seconds: float = 1.0

    def __post_init__(self):
        if self.counts < 0:
            raise ValueError("counts must be nonnegative")
        if not self.integration_seconds > 0:
            raise ValueError("integration_seconds must be positive")


@dataclass(frozen=True)
class TomographyResult:
    rho: DensityMatrix2Q
    log_likelihood: float
    iterations: int
    converged: bool
    history: tuple[float, ...] = ()


@dataclass(frozen=True)
class BootstrapResult:
    fidelity_std: float
    chsh_std: float
    fidelity_mean: float
    chsh_mean: float
    n_bootstrap: int


def tomography_settings(kind: str = "16") -> list[MeasurementSetting]:
    """Analyzer settings: ``"16"`` is {H,V,D,R}^2, ``"36"`` is {H,V,D,A,R,L}^2."""
    if kind == "16":
        labels = "HVDR"
    elif kind == "36":
        labels = "HVDARL"
    else:
        raise ValueError(f"unknown tomography set {kind!r}")
    return [MeasurementSetting.from_labels(a, b) for a, b in product(labels, repeat=2)]


def expected_counts(rho: DensityMatrix2Q, settings, mean_total: float,
                    integration_seconds: float = 1.0, background_rate: float = 0.0) -> np.ndarray:
    probs = np.array([rho.expectation(s.projector()) for s in settings])
    return mean_total * np.clip(probs, 0.0, None) + background_rate * integration_seconds


def simulate_counts(rho: DensityMatrix2Q, settings, mean_total: float, seed,
                    integration_seconds: float = 1.0,
                    background_rate: float = 0.0) -> list[MeasurementRecord]:
    """Poisson coincidence counts for each analyzer setting.

    The expected count of a setting is ``mean_total * tr(rho Pa(x)Pb)`` plus
    background.  ``seed`` feeds :func:`numpy.random.default_rng`, so equal
    seeds give identical records.
    """
    if not mean_total > 0:
        raise ValueError("mean_total must be positive")
    settings = list(settings)
    rng = np.random.default_rng(seed)
    lam = expected_counts(rho, settings, mean_total, integration_seconds, background_rate)
    counts = rng.poisson(lam)
    return [MeasurementRecord(s, int(n), integration_seconds) for s, n in zip(settings, counts)]


def _design(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    projectors = np.array([r.setting.projector() for r in records])
    counts = np.array([r.counts for r in records], dtype=float)
    times = np.array([r.integration_seconds for r in records], dtype=float)
    return projectors, counts, times


_PAULI_PRODUCTS = np.array([np.kron(a, b) for a in PAULI for b in PAULI])


def tomography_linear(records, background_rate: float = 0.0,
                      return_raw: bool = False):
    """Linear-inversion estimate, clipped to the nearest physical state.

    Solves ``n_k - b T_k = sum_ij s_ij tr(P_k sigma_i sigma_j) / 4`` for the
    unnormalized Stokes parameters ``s_ij`` and divides by ``s_00``.  With
    ``return_raw=True`` the unclipped (possibly non-positive) matrix is
    returned as a second value.
    """
    records = list(records)
    projectors, counts, times = _design(records)
    a = np.real(np.einsum("kab,mba->km", projectors, _PAULI_PRODUCTS)) / 4.0
    if len(records) < 16 or np.linalg.matrix_rank(a) < 16:
        raise InformationalCompletenessError(
            f"{len(records)} settings span rank {np.linalg.matrix_rank(a)} of 16"
        )
    y = counts - background_rate * times
    stokes, *_ = np.linalg.lstsq(a, y, rcond=None)
    if stokes[0] <= 0:
        raise ValueError("no signal left after background subtraction")
    raw = np.einsum("m,mab->ab", stokes / stokes[0], _PAULI_PRODUCTS) / 4.0
    rho = DensityMatrix2Q.project(raw)
    if return_raw:
        return rho, raw
    return rho


def log_likelihood(rho: DensityMatrix2Q, records, background_rate: float = 0.0) -> float:
    """Poisson log-likelihood of the records, maximized over the count scale N."""
    projectors, counts, times = _design(list(records))
    p = np.real(np.einsum("kab,ba->k", projectors, rho.elements))
    p = np.clip(p, 0.0, None)
    bg = background_rate * times

    def ll(scale):
        mu = scale * p + bg
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(counts > 0, counts * np.log(mu), 0.0)
        return float(np.sum(terms - mu - gammaln(counts + 1)))

    if background_rate == 0.0:
        total_p = p.sum()
        scale = counts.sum() / total_p if total_p > 0 else 0.0
        return ll(scale)
    upper = 10.0 * (counts.sum() + 1.0) / max(p.sum(), 1e-300)
    res = minimize_scalar(lambda s: -ll(s), bounds=(0.0, upper), method="bounded")
    return -float(res.fun)


_TRIL = np.tril_indices(4)
_DIAG_MASK = _TRIL[0] == _TRIL[1]
_N_OFF = int(np.sum(~_DIAG_MASK))


def _unpack(x: np.ndarray) -> np.ndarray:
    vals = np.empty(len(_TRIL[0]), dtype=complex)
    vals[_DIAG_MASK] = x[:4]
    vals[~_DIAG_MASK] = x[4:4 + _N_OFF] + 1j * x[4 + _N_OFF:]
    lower = np.zeros((4, 4), dtype=complex)
    lower[_TRIL] = vals
    return lower


def _pack(lower: np.ndarray) -> np.ndarray:
    vals = lower[_TRIL]
    off = vals[~_DIAG_MASK]
    return np.concatenate([vals[_DIAG_MASK].real, off.real, off.imag])


def _history_callback(history: list, ll_const: float):
    # scipy passes the current OptimizeResult when the argument has this name
    def callback(intermediate_result):
        history.append(ll_const - float(intermediate_result.fun))

    return callback


def tomography_mle(records, init: DensityMatrix2Q | None = None,
                   tolerance: float = 1e-12, max_iterations: int = 2000,
                   background_rate: float = 0.0) -> TomographyResult:
    """Maximum-likelihood reconstruction over physical states.

    The optimizer is L-BFGS-B on the Cholesky-factor parameters, started from
    ``init`` (linear inversion when omitted).  ``converged`` is set when the
    relative change of the objective drops below ``tolerance``; hitting
    ``max_iterations`` returns the current estimate with ``converged=False``.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    records = list(records)
    projectors, counts, times = _design(records)
    bg = background_rate * times
    total = float(counts.sum())
    if total <= 0:
        raise ValueError("records hold no counts")
    if init is None:
        init = tomography_linear(records, background_rate=background_rate)

    start = init.elements
    if np.linalg.eigvalsh(start).min() < 1e-12:
        # a rank-deficient start would pin some factor entries at zero
        start = (1 - 1e-9) * start + 1e-9 * np.eye(4) / 4
    scale0 = max(total - bg.sum(), 1.0) / max(
        np.real(np.einsum("kab,ba->k", projectors, start)).sum(), 1e-300
    )
    x0 = _pack(np.linalg.cholesky(scale0 * start))
    # Poisson deviance / 2, zero for a perfect fit; LL = const - deviance
    nlogn = np.where(counts > 0, counts * np.log(np.where(counts > 0, counts, 1.0)), 0.0)
    ll_const = float(np.sum(nlogn - counts - gammaln(counts + 1)))

    def objective(x):
        lower = _unpack(x)
        a = lower @ lower.conj().T
        mu = np.real(np.einsum("kab,ba->k", projectors, a)) + bg
        mu = np.maximum(mu, 1e-300)
        f = float(np.sum(mu - counts) - np.sum(counts * np.log(mu)) + np.sum(nlogn))
        r = np.einsum("k,kab->ab", counts / mu - 1.0, projectors)
        grad = -2.0 * _pack(r @ lower)
        return f, grad

    history: list[float] = [ll_const - objective(x0)[0]]
    res = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=_history_callback(history, ll_const),
        options={"maxiter": max_iterations, "ftol": tolerance, "gtol": 1e-10, "maxcor": 30},
    )
    lower = _unpack(res.x)
    a = lower @ lower.conj().T
    rho = DensityMatrix2Q.project(a / np.trace(a).real)
    ll = log_likelihood(rho, records, background_rate=background_rate)
    ll_init = log_likelihood(init, records, background_rate=background_rate)
    if ll_init > ll:
        # optimizer made no net progress beyond rounding; keep the better point
        rho, ll = init, ll_init
    last_change = abs(history[-1] - history[-2]) / max(abs(history[-1]), 1.0) if len(history) > 1 else 0.0
    # a zero deviance means the fit is saturated even if the line search balks
    converged = res.nit < max_iterations and (
        bool(res.success) or last_change < tolerance or res.fun <= tolerance
    )
    return TomographyResult(rho, ll, int(res.nit), converged, tuple(history))


def _estimate(records, estimator: str, background_rate: float) -> DensityMatrix2Q:
    if estimator == "linear":
        return tomography_linear(records, background_rate=background_rate)
    if estimator == "mle":
        return tomography_mle(records, background_rate=background_rate).rho
    raise ValueError(f"unknown estimator {estimator!r}")


def error_bars(records, estimator: str = "linear", n_bootstrap: int = 200, seed=0,
               target=None, angles=DEFAULT_CHSH_ANGLES,
               background_rate: float = 0.0) -> BootstrapResult:
    """Parametric bootstrap spread of the fidelity and fixed-angle CHSH value.

    Every trial redraws each count from a Poisson law centred on the observed
    value and re-runs the estimator.  Trial ``k`` uses the seed sequence
    ``(seed, k)``, so results do not depend on execution order.
    """
    if n_bootstrap < 100:
        raise ValueError("n_bootstrap must be at least 100")
    records = list(records)
    target = bell_state("psi-") if target is None else np.asarray(target, dtype=complex)
    fids = np.empty(n_bootstrap)
    chshs = np.empty(n_bootstrap)
    observed = np.array([r.counts for r in records], dtype=float)
    for k in range(n_bootstrap):
        rng = np.random.default_rng([int(seed), k])
        resampled = rng.poisson(observed)
        trial = [
            MeasurementRecord(r.setting, int(n), r.integration_seconds)
            for r, n in zip(records, resampled)
        ]
        rho = _estimate(trial, estimator, background_rate)
        fids[k] = fidelity(rho, target)
        chshs[k] = chsh_fixed(rho, angles)
    return BootstrapResult(
        float(np.std(fids, ddof=1)),
        float(np.std(chshs, ddof=1)),
        float(np.mean(fids)),
        float(np.mean(chshs)),
        n_bootstrap,
    )


def chsh_settings(angles=DEFAULT_CHSH_ANGLES) -> list[MeasurementSetting]:
    """The 16 linear-analyzer settings of a CHSH run.

    For every pair (x, y) with x in (a, a') and y in (b, b') the four
    combinations of x or x+90 with y or y+90 are listed, in that order.
    """
    a, a2, b, b2 = angles
    out = []
    for x in (a, a2):
        for y in (b, b2):
            for dx, dy in ((0, 0), (90, 90), (0, 90), (90, 0)):
                out.append(MeasurementSetting.linear(x + dx, y + dy))
    return out


def chsh_from_records(records, angles=DEFAULT_CHSH_ANGLES) -> float:
    """CHSH value estimated directly from counts laid out as :func:`chsh_settings`."""
    counts = np.array([r.counts for r in records], dtype=float)
    if counts.size != 16:
        raise ValueError("a CHSH run needs exactly 16 records")
    e = []
    for block in counts.reshape(4, 4):
        total = block.sum()
        if total <= 0:
            raise ValueError("a CHSH correlation has no counts")
        e.append((block[0] + block[1] - block[2] - block[3]) / total)
    e_ab, e_ab2, e_a2b, e_a2b2 = e
    return float(abs(e_ab - e_ab2 + e_a2b + e_a2b2))


_RECORD_FIELDS = ["hwp_a_deg", "qwp_a_deg", "hwp_b_deg", "qwp_b_deg", "counts", "integration_seconds"]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_RECORD_FIELDS)
    for r in records:
        s = r.setting
        w.writerow([*map(repr, s.projector_a), *map(repr, s.projector_b), r.counts,
                    repr(float(r.integration_seconds))])
    return buf.getvalue()


def records_from_csv(text: str) -> list[MeasurementRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(_RECORD_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"record CSV lacks columns {sorted(missing)}")
    out = []
    for row in reader:
        setting = MeasurementSetting(
            (float(row["hwp_a_deg"]), float(row["qwp_a_deg"])),
            (float(row["hwp_b_deg"]), float(row["qwp_b_deg"])),
        )
        counts = float(row["counts"])
        if counts != math.floor(counts):
            raise ValueError(f"counts must be integers, got {row['counts']!r}")
        out.append(MeasurementRecord(setting, int(counts), float(row["integration_seconds"])))
    return out
