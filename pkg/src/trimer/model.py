"""Two bosons in an ac-driven three-site Bose-Hubbard chain.

All quantities are dimensionless (hbar = 1).  The drive is
``eps(t) = eps * cos(omega * t)`` acting as a tilt ``eps(t) (n_R - n_L)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

FOCK_BASIS = ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1))
FOCK_LABELS = tuple("".join(map(str, occ)) for occ in FOCK_BASIS)
PAIRED = (0, 1, 2)
UNPAIRED = (3, 4, 5)

_SQRT2 = math.sqrt(2.0)
# (row, col, coefficient of -J); zero-based indices into FOCK_BASIS
_HOPPING = ((0, 3, _SQRT2), (1, 3, _SQRT2), (1, 5, _SQRT2), (2, 5, _SQRT2), (3, 4, 1.0), (4, 5, 1.0))
# coefficient of eps(t) on the diagonal
DRIVE_PROFILE = np.array([-2.0, 0.0, 2.0, -1.0, 0.0, 1.0])
# on-site interaction count on the diagonal
_PAIR_PROFILE = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class InteractionDecomposition:
    m: int
    u: float


@dataclass(frozen=True)
class ModelParams:
    """Hopping ``J``, interaction ``U0``, drive amplitude ``eps`` and frequency ``omega``.

    ``J = 0`` is accepted so that the undriven/uncoupled limits can be run.
    """

    J: float
    U0: float
    eps: float
    omega: float

    def __post_init__(self):
        for name in ("J", "U0", "eps", "omega"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.J < 0:
            raise DomainError(f"J must be non-negative, got {self.J}")
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.eps < 0:
            raise DomainError(f"eps must be non-negative, got {self.eps}")

    @classmethod
    def from_ratios(cls, J, omega, *, U0_over_omega=None, eps_over_omega=None, U0=None, eps=None):
        if (U0 is None) == (U0_over_omega is None):
            raise DomainError("give exactly one of U0, U0_over_omega")
        if (eps is None) == (eps_over_omega is None):
            raise DomainError("give exactly one of eps, eps_over_omega")
        if U0 is None:
            U0 = U0_over_omega * omega
        if eps is None:
            eps = eps_over_omega * omega
        return cls(J=J, U0=U0, eps=eps, omega=omega)

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    @property
    def eps_over_omega(self):
        return self.eps / self.omega

    @property
    def U0_over_omega(self):
        return self.U0 / self.omega

    def as_dict(self):
        return {"J": self.J, "U0": self.U0, "eps": self.eps, "omega": self.omega}


def decompose_interaction(params):
    """Split ``U0 = m * omega + u`` with ``m >= 0`` and ``u`` in ``(-omega/2, omega/2]``."""
    if params.U0 < 0:
        raise DomainError(f"U0 must be non-negative for the photon decomposition, got {params.U0}")
    m = max(0, math.ceil(params.U0 / params.omega - 0.5))
    u = params.U0 - m * params.omega
    # guard against rounding in U0/omega right at the tie
    if u > params.omega / 2:
        m += 1
        u = params.U0 - m * params.omega
    elif u <= -params.omega / 2 and m > 0:
        m -= 1
        u = params.U0 - m * params.omega
    return InteractionDecomposition(m=int(m), u=float(u))


def basis_state(label):
    """Unit vector for a Fock label such as ``"020"``."""
    try:
        index = FOCK_LABELS.index(str(label))
    except ValueError:
        raise DomainError(f"unknown Fock label {label!r}; expected one of {FOCK_LABELS}") from None
    state = np.zeros(6, dtype=complex)
    state[index] = 1.0
    return state


def hopping_matrix(J):
    h = np.zeros((6, 6))
    for i, j, c in _HOPPING:
        h[i, j] = h[j, i] = -c * J
    return h


def static_hamiltonian(params):
    """Time-independent part: hopping plus on-site interaction."""
    return hopping_matrix(params.J) + np.diag(params.U0 * _PAIR_PROFILE)


def hamiltonian(params, t):
    """Real symmetric 6x6 Hamiltonian at time ``t`` in the fixed Fock order."""
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    h = static_hamiltonian(params)
    h[np.diag_indices(6)] += params.eps * math.cos(params.omega * t) * DRIVE_PROFILE
    return h


def drive_phase(params, t):
    """Integrated tilt ``phi(t) = (eps/omega) sin(omega t)``."""
    return params.eps_over_omega * np.sin(params.omega * np.asarray(t, dtype=float))


def rotating_frame_phases(params, t):
    """Phases ``theta_j(t)`` with ``c_j = a_j exp(-i theta_j)``.

    They remove the diagonal of the Hamiltonian exactly, so the rotating-frame
    amplitudes only see the (phase-dressed) hopping.  Shape ``(..., 6)``.
    """
    t = np.asarray(t, dtype=float)
    phi = drive_phase(params, t)
    ut = params.U0 * t
    return np.stack([ut - 2 * phi, ut, ut + 2 * phi, -phi, np.zeros_like(t), phi], axis=-1)
