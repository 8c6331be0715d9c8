"""Two interacting bosons in an ac-driven triple well.

Exact and effective dynamics, second-order co-tunneling coefficients and
Floquet quasienergy spectra.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    Trajectory,
    integrate_exact,
    integrate_first_order,
    integrate_second_order,
    time_averaged_S,
)
from .effective import TunnelingCoefficients, find_rho2_zeros, rho_coefficients  # noqa: E402
from .floquet import classify_bands, floquet_spectrum, monodromy, quasienergies  # noqa: E402
from .model import FOCK_LABELS, ModelParams, decompose_interaction, hamiltonian  # noqa: E402
from .specfun import bessel_j  # noqa: E402

__all__ = [
    "FOCK_LABELS",
    "ModelParams",
    "Trajectory",
    "TunnelingCoefficients",
    "bessel_j",
    "classify_bands",
    "decompose_interaction",
    "find_rho2_zeros",
    "floquet_spectrum",
    "hamiltonian",
    "integrate_exact",
    "integrate_first_order",
    "integrate_second_order",
    "monodromy",
    "quasienergies",
    "rho_coefficients",
    "time_averaged_S",
]
