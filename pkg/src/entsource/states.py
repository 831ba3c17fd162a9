"""Two-qubit polarization states: density matrices, analyzers, fidelity, CHSH.

Basis order is (HH, HV, VH, VV) with the first slot the photon in output A.
Single-photon states use R = (H + iV)/sqrt(2), L = (H - iV)/sqrt(2),
D = (H + V)/sqrt(2), A = (H - V)/sqrt(2).

Analyzer convention: the photon crosses a half-wave plate at angle ``hwp``,
then a quarter-wave plate at ``qwp``, then a polarizer transmitting H.  With
Jones matrices ``W_hwp`` and ``W_qwp`` the transmitted (projected) state is
``(W_qwp W_hwp)^dagger |H>``.  This gives

    H = (0, 0)    V = (45, 0)    D = (22.5, 0)    A = (-22.5, 0)
    R = (0, -45)  L = (0, 45)

and a linear analyzer at angle ``a`` is ``(a/2, 0)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BASIS_LABELS",
    "PAULI",
    "DensityMatrix2Q",
    "MeasurementSetting",
    "ANALYZER_ANGLES",
    "hwp_jones",
    "qwp_jones",
    "analyzer_state",
    "bell_state",
    "werner_state",
    "random_density_matrix",
    "fidelity",
    "trace_distance",
    "correlation",
    "chsh_fixed",
    "chsh_optimal",
    "correlation_matrix",
    "werner_chsh_from_fidelity",
    "DEFAULT_CHSH_ANGLES",
    "density_matrix_to_csv",
    "density_matrix_from_csv",
]

BASIS_LABELS = ("HH", "HV", "VH", "VV")

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# (hwp, qwp) in degrees
ANALYZER_ANGLES = {
    "H": (0.0, 0.0),
    "V": (45.0, 0.0),
    "D": (22.5, 0.0),
    "A": (-22.5, 0.0),
    "R": (0.0, -45.0),
    "L": (0.0, 45.0),
}

# analyzer angles a, a', b, b' (deg)
DEFAULT_CHSH_ANGLES = (0.0, 45.0, 22.5, 67.5)

_HERM_ATOL = 1e-10
_TRACE_ATOL = 1e-10
_PSD_ATOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix2Q:
    """Validated 4x4 density matrix over (HH, HV, VH, VV)."""

    elements: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > _HERM_ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > _TRACE_ATOL:
            raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}, not 1")
        if np.linalg.eigvalsh(rho).min() < -_PSD_ATOL:
            raise ValueError("density matrix has negative eigenvalues")
        rho = (rho + rho.conj().T) / 2
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix2Q":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def project(cls, matrix) -> "DensityMatrix2Q":
        """Nearest density matrix: Hermitian part, eigenvalues clipped at zero, unit trace."""
        m = np.asarray(matrix, dtype=complex)
        m = (m + m.conj().T) / 2
        vals, vecs = np.linalg.eigh(m)
        vals = np.clip(vals, 0.0, None)
        if vals.sum() <= 0:
            raise ValueError("matrix has no positive part")
        vals = vals / vals.sum()
        return cls((vecs * vals) @ vecs.conj().T)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.elements)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.elements @ self.elements)))

    def expectation(self, operator) -> float:
        return float(np.real(np.trace(self.elements @ operator)))


@dataclass(frozen=True)
class MeasurementSetting:
    """Analyzer pair, each given as (hwp_deg, qwp_deg)."""

    projector_a: tuple[float, float]
    projector_b: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "projector_a", tuple(float(v) for v in self.projector_a))
        object.__setattr__(self, "projector_b", tuple(float(v) for v in self.projector_b))

    @classmethod
    def from_labels(cls, a: str, b: str) -> "MeasurementSetting":
        return cls(ANALYZER_ANGLES[a], ANALYZER_ANGLES[b])

    @classmethod
    def linear(cls, angle_a: float, angle_b: float) -> "MeasurementSetting":
        """Linear polarizers at ``angle_a`` / ``angle_b`` degrees from H."""
        return cls((angle_a / 2.0, 0.0), (angle_b / 2.0, 0.0))

    @property
    def state_a(self) -> np.ndarray:
        return analyzer_state(*self.projector_a)

    @property
    def state_b(self) -> np.ndarray:
        return analyzer_state(*self.projector_b)

    def projector(self) -> np.ndarray:
        """Two-photon projector ``Pa (x) Pb``."""
        v = np.kron(self.state_a, self.state_b)
        return np.outer(v, v.conj())


def hwp_jones(theta_deg: float) -> np.ndarray:
    t = math.radians(2.0 * theta_deg)
    return np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]], dtype=complex)


def qwp_jones(theta_deg: float) -> np.ndarray:
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]],
        dtype=complex,
    )


def analyzer_state(hwp_deg: float, qwp_deg: float) -> np.ndarray:
    """Single-photon state transmitted by HWP -> QWP -> H polarizer.

    The global phase is fixed so the first nonzero component is real positive.
    """
    m = qwp_jones(qwp_deg) @ hwp_jones(hwp_deg)
    v = m.conj().T @ np.array([1.0, 0.0], dtype=complex)
    k = int(np.argmax(np.abs(v) > 1e-12))
    v = v * np.exp(-1j * np.angle(v[k]))
    return v / np.linalg.norm(v)


def bell_state(name: str) -> np.ndarray:
    """Bell vectors; ``psi-`` is (HV - VH)/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    table = {
        "psi-": [0, s, -s, 0],
        "psi+": [0, s, s, 0],
        "phi-": [s, 0, 0, -s],
        "phi+": [s, 0, 0, s],
    }
    try:
        return np.array(table[name], dtype=complex)
    except KeyError:
        raise ValueError(f"unknown Bell state {name!r}") from None


def werner_state(p: float, target: str = "psi-") -> DensityMatrix2Q:
    """``p |target><target| + (1 - p) I/4``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("Werner weight must lie in [0,1]")
    psi = bell_state(target)
    return DensityMatrix2Q(p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4)


def random_density_matrix(rng: np.random.Generator, rank: int = 4) -> DensityMatrix2Q:
    """Ginibre-distributed state of the given rank."""
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return DensityMatrix2Q(m / np.trace(m).real)


def fidelity(rho: DensityMatrix2Q, target) -> float:
    """``<target| rho |target>`` for a pure target vector."""
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    value = float(np.real(psi.conj() @ rho.elements @ psi))
    return min(max(value, 0.0), 1.0)


def trace_distance(a: DensityMatrix2Q, b: DensityMatrix2Q) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.elements - b.elements))))


def correlation(rho: DensityMatrix2Q, angle_a: float, angle_b: float) -> float:
    """Polarization correlation E(a, b) for linear analyzers at the given degrees.

    E = P(a,b) + P(a+90,b+90) - P(a,b+90) - P(a+90,b).
    """
    def p(x, y):
        return rho.expectation(MeasurementSetting.linear(x, y).projector())

    return (
        p(angle_a, angle_b)
        + p(angle_a + 90.0, angle_b + 90.0)
        - p(angle_a, angle_b + 90.0)
        - p(angle_a + 90.0, angle_b)
    )


def chsh_fixed(rho: DensityMatrix2Q, angles=DEFAULT_CHSH_ANGLES) -> float:
    """``|E(a,b) - E(a,b') + E(a',b) + E(a',b')|`` with ``angles = (a, a', b, b')``."""
    a, a2, b, b2 = angles
    return abs(
        correlation(rho, a, b)
        - correlation(rho, a, b2)
        + correlation(rho, a2, b)
        + correlation(rho, a2, b2)
    )


def correlation_matrix(rho: DensityMatrix2Q) -> np.ndarray:
    """``T_ij = tr(rho sigma_i (x) sigma_j)`` for i, j in (x, y, z)."""
    t = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            t[i, j] = rho.expectation(np.kron(PAULI[i + 1], PAULI[j + 1]))
    return t


def chsh_optimal(rho: DensityMatrix2Q) -> float:
    """Largest CHSH value over all analyzer settings (Horodecki criterion)."""
    t = correlation_matrix(rho)
    m = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return 2.0 * math.sqrt(max(m[0] + m[1], 0.0))


def werner_chsh_from_fidelity(f: float) -> float:
    """Optimal CHSH value of the Werner state with singlet fidelity ``f``."""
    p = (4.0 * f - 1.0) / 3.0
    return 2.0 * math.sqrt(2.0) * p


def density_matrix_to_csv(rho: DensityMatrix2Q) -> str:
    """Real block then imaginary block, one labelled row per basis element."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["part", "row", *BASIS_LABELS])
    for part, block in (("real", rho.elements.real), ("imag", rho.elements.imag)):
        for label, row in zip(BASIS_LABELS, block):
            w.writerow([part, label, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def density_matrix_from_csv(text: str) -> DensityMatrix2Q:
    rows = list(csv.DictReader(io.StringIO(text)))
    if len(rows) != 8:
        raise ValueError("density matrix CSV needs 8 data rows")
    m = np.zeros((4, 4), dtype=complex)
    for r in rows:
        i = BASIS_LABELS.index(r["row"])
        vals = np.array([float(r[c]) for c in BASIS_LABELS])
        if r["part"] == "real":
            m[i] += vals
        elif r["part"] == "imag":
            m[i] += 1j * vals
        else:
            raise ValueError(f"unknown part {r['part']!r}")
    return DensityMatrix2Q(m)
