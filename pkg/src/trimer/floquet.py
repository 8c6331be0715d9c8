"""One-period propagator, quasienergies and their perturbative counterparts."""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import schur

from .effective import rho_coefficients
from .errors import AccuracyError, IntegrationError, NumericError
from .model import DRIVE_PROFILE, PAIRED, static_hamiltonian
from .specfun import bessel_j

UNITARITY_LIMIT = 1e-8
MODULUS_LIMIT = 1e-7
RESIDUAL_LIMIT = 1e-8
PAIRED_ABOVE = 0.6
UNPAIRED_BELOW = 0.4


@dataclass(frozen=True)
class Monodromy:
    matrix: np.ndarray
    period: float
    defect: float
    params: object = None

    @property
    def omega(self):
        return 2.0 * math.pi / self.period


@dataclass(frozen=True)
class QuasienergyRecord:
    """Quasienergies sorted ascending, with eigenvectors as matching columns."""

    energies: np.ndarray
    eigenvectors: np.ndarray
    eps_over_omega: float = math.nan
    U0_over_omega: float = math.nan
    labels: tuple = (None,) * 6
    confidences: np.ndarray = field(default_factory=lambda: np.full(6, np.nan))

    def band(self, label):
        return np.array([e for e, lab in zip(self.energies, self.labels) if lab == label])

    def min_gap(self, label=None):
        values = np.sort(self.energies if label is None else self.band(label))
        if len(values) < 2:
            return math.inf
        return float(np.min(np.diff(values)))


@dataclass(frozen=True)
class AnalyticQuasienergies:
    unpaired: tuple
    paired: tuple
    paired_unfolded: tuple
    rho3: float

    def sextuple(self):
        return np.sort(np.array(self.unpaired + self.paired))


def _unitarity_defect(u):
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def period_propagators(params, n_phases=1, tol=1e-11):
    """Propagators ``U(k T / n_phases, 0)`` for ``k = 0 .. n_phases``.

    Integrates ``i dU/dt = H(t) U`` from the identity over one drive period with
    an adaptive 8th-order Runge-Kutta scheme on the real and imaginary parts.
    Returns an array of shape ``(n_phases + 1, 6, 6)``; the last entry is the
    monodromy matrix.
    """
    h0 = static_hamiltonian(params)
    drive = params.eps * DRIVE_PROFILE
    omega = params.omega
    period = params.period

    def rhs(t, y):
        u = (y[:36] + 1j * y[36:]).reshape(6, 6)
        h = h0.copy()
        h[np.diag_indices(6)] += math.cos(omega * t) * drive
        du = (-1j * (h @ u)).ravel()
        return np.concatenate([du.real, du.imag])

    y0 = np.concatenate([np.eye(6).ravel(), np.zeros(36)])
    t_eval = np.arange(n_phases + 1) * (period / n_phases)
    t_eval[-1] = period
    sol = solve_ivp(rhs, (0.0, period), y0, method="DOP853", rtol=tol, atol=tol, t_eval=t_eval)
    if sol.status != 0:
        failed_at = float(sol.t[-1]) if len(sol.t) else 0.0
        raise IntegrationError(f"period propagator failed: {sol.message}", failed_at)
    y = sol.y.T
    return (y[:, :36] + 1j * y[:, 36:]).reshape(-1, 6, 6)


def monodromy(params, tol=1e-11):
    """One-period propagator ``U(T, 0)``; raises AccuracyError if not unitary to 1e-8."""
    if tol > 1e-10:
        raise ValueError(f"monodromy needs tol <= 1e-10, got {tol:g}")
    u = period_propagators(params, 1, tol)[-1]
    defect = _unitarity_defect(u)
    if defect > UNITARITY_LIMIT:
        raise AccuracyError(f"monodromy unitarity defect {defect:.2e} exceeds {UNITARITY_LIMIT:g}; tighten tol")
    return Monodromy(matrix=u, period=params.period, defect=defect, params=params)


def fold_quasienergy(energy, omega):
    """Map into the first Brillouin zone ``(-omega/2, omega/2]``."""
    e = np.asarray(energy, dtype=float)
    half = 0.5 * omega
    inside = (e > -half) & (e <= half)
    shifted = e - omega * np.ceil((e - half) / omega)
    shifted = np.where(shifted <= -half, shifted + omega, shifted)
    shifted = np.where(shifted > half, shifted - omega, shifted)
    out = np.where(inside, e, shifted)
    return float(out) if out.ndim == 0 else out


def quasienergies(mono, omega=None):
    """Quasienergies from the eigenphases of the monodromy matrix.

    The complex Schur form of a normal matrix is diagonal, so the Schur vectors
    are an orthonormal eigenbasis even at exact degeneracies.
    """
    if omega is None:
        omega = mono.omega
    period = 2.0 * math.pi / omega
    try:
        tri, vecs = schur(mono.matrix, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigen-decomposition failed: {exc}") from exc
    lam = np.diag(tri)
    moduli = np.abs(np.abs(lam) - 1.0)
    if np.max(moduli) > MODULUS_LIMIT:
        raise AccuracyError(f"eigenvalue modulus off the unit circle by {np.max(moduli):.2e}")
    residual = np.max(np.linalg.norm(mono.matrix @ vecs - vecs * lam, axis=0))
    if residual > RESIDUAL_LIMIT:
        raise NumericError(f"eigenpair residual {residual:.2e} exceeds {RESIDUAL_LIMIT:g}")
    energies = fold_quasienergy(-np.angle(lam) / period, omega)
    order = np.argsort(energies, kind="stable")
    p = mono.params
    return QuasienergyRecord(
        energies=energies[order],
        eigenvectors=vecs[:, order],
        eps_over_omega=p.eps_over_omega if p is not None else math.nan,
        U0_over_omega=p.U0_over_omega if p is not None else math.nan,
    )


def classify_bands(record, eigenvectors=None):
    """Label each quasienergy paired/unpaired by its weight on the paired states."""
    vecs = record.eigenvectors if eigenvectors is None else eigenvectors
    weight = np.sum(np.abs(vecs[list(PAIRED), :]) ** 2, axis=0)
    labels = tuple(
        "paired" if w > PAIRED_ABOVE else "unpaired" if w < UNPAIRED_BELOW else "ambiguous" for w in weight
    )
    return replace(record, labels=labels, confidences=np.abs(2.0 * weight - 1.0))


def floquet_spectrum(params, tol=1e-11):
    """Monodromy, quasienergies and band labels in one call."""
    return classify_bands(quasienergies(monodromy(params, tol)))


def analytic_unpaired_quasienergies(params, coeffs):
    """Perturbative quasienergies of the three unpaired states and ``rho3``.

    The antisymmetric combination of |1,1,0> and |0,1,1> gives the first
    value; the symmetric sector mixes with |1,0,1> and yields the pair
    ``-(2 J^2 rho1 + J^2 rho2)/omega -/+ rho3/omega``.  This overall sign was
    checked against the monodromy spectrum (see tests/test_floquet.py).
    """
    J2 = params.J**2
    omega = params.omega
    j0 = bessel_j(0, params.eps_over_omega)
    shift = 2.0 * J2 * coeffs.rho1 + J2 * coeffs.rho2
    rho3 = math.sqrt(shift**2 + 2.0 * J2 * omega**2 * j0**2)
    e1 = -2.0 * (2.0 * J2 * coeffs.rho1 - J2 * coeffs.rho2) / omega
    e2 = (-shift - rho3) / omega
    e3 = (-shift + rho3) / omega
    return (e1, e2, e3), rho3


def analytic_paired_quasienergies(params, coeffs, fold=True):
    """Perturbative quasienergies of the three paired states, folded by default."""
    J2 = params.J**2
    omega = params.omega
    split = math.sqrt(J2 * J2 * coeffs.rho1**2 + 8.0 * J2 * J2 * coeffs.rho2**2)
    e4 = params.U0 + 2.0 * J2 * coeffs.rho1 / omega
    e5 = params.U0 + (3.0 * J2 * coeffs.rho1 + split) / omega
    e6 = params.U0 + (3.0 * J2 * coeffs.rho1 - split) / omega
    if not fold:
        return e4, e5, e6
    return tuple(fold_quasienergy(e, omega) for e in (e4, e5, e6))


def analytic_quasienergies(params, coeffs=None):
    if coeffs is None:
        coeffs = rho_coefficients(params)
    unpaired, rho3 = analytic_unpaired_quasienergies(params, coeffs)
    raw = analytic_paired_quasienergies(params, coeffs, fold=False)
    paired = tuple(fold_quasienergy(e, params.omega) for e in raw)
    return AnalyticQuasienergies(unpaired=unpaired, paired=paired, paired_unfolded=raw, rho3=rho3)


def paired_crossing_gap(params, coeffs):
    """Distance from E4 to the nearer of E5/E6 before folding; zero at a crossing."""
    e4, e5, e6 = analytic_paired_quasienergies(params, coeffs, fold=False)
    return min(abs(e5 - e4), abs(e4 - e6))


def find_paired_crossings(U0_over_omega, lo=0.0, hi=8.0, step=0.005, J=1.0, omega=80.0, gap_tol=1e-8):
    """Locate level crossings inside the paired band along ``eps/omega``.

    Works purely from the perturbative energies: local minima of the
    E4-to-(E5|E6) gap on the grid are polished with a bounded scalar search
    and kept when the gap closes below ``gap_tol`` (in units of J^2/omega).
    """
    from scipy.optimize import minimize_scalar

    from .model import ModelParams

    def gap(x):
        p = ModelParams.from_ratios(J, omega, U0_over_omega=U0_over_omega, eps_over_omega=x)
        return paired_crossing_gap(p, rho_coefficients(p)) * omega / J**2

    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = lo + step * np.arange(count + 1)
    values = np.array([gap(x) for x in grid])
    found = []
    for k in range(len(grid)):
        left = values[k - 1] if k > 0 else math.inf
        right = values[k + 1] if k + 1 < len(grid) else math.inf
        if values[k] <= left and values[k] <= right:
            a = grid[max(k - 1, 0)]
            b = grid[min(k + 1, len(grid) - 1)]
            res = minimize_scalar(gap, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
            if res.fun < gap_tol:
                found.append(float(res.x))
    found.sort()
    merged = []
    for x in found:
        if not merged or x - merged[-1] > step:
            merged.append(x)
    return merged
