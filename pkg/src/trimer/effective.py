"""Second-order co-tunneling coefficients and closed-form probabilities.

In the far-resonant regime the paired states (both bosons on one site) only
move through virtual visits to unpaired states.  The resulting level shifts
and pair-hopping rates are Bessel sums over photon-assisted channels::

    rho1 = sum_n  J_n(x)^2          / (r + n)
    rho2 = sum_n  J_n(x) J_{-n}(x)  / (r + n)

with ``x = eps/omega`` and ``r = U0/omega``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoefficientsError, PreconditionError, ResonanceError
from .specfun import bessel_j, bessel_j_orders

RESONANCE_GUARD = 1e-6
EXTRA_ORDERS = 40
TAIL_BOUND = 1e-14


@dataclass(frozen=True)
class TunnelingCoefficients:
    rho1: float
    rho2: float
    omega1: float
    omega2: float
    truncation: int

    @property
    def paired_period(self):
        """Period of the paired populations, pi / omega1."""
        return math.pi / self.omega1 if self.omega1 > 0 else math.inf

    @property
    def unpaired_period(self):
        return math.pi / abs(self.omega2) if self.omega2 != 0 else math.inf


def default_truncation(eps_over_omega):
    return math.ceil(abs(eps_over_omega)) + EXTRA_ORDERS


def check_resonance(U0_over_omega):
    nearest = round(U0_over_omega)
    if abs(U0_over_omega - nearest) <= RESONANCE_GUARD:
        raise ResonanceError(
            f"U0/omega = {U0_over_omega!r} is within {RESONANCE_GUARD:g} of the integer {nearest}; "
            "the second-order sums diverge there"
        )


def rho_sums(eps_over_omega, U0_over_omega, truncation=None, bessel=None):
    """Return ``(rho1, rho2)`` truncated at ``|n| <= truncation``.

    ``bessel`` may carry precomputed ``(orders, values)`` from
    :func:`bessel_j_orders` at the same argument, which is what the surface
    scans do to reuse one Bessel ladder across many ``U0/omega``.
    """
    check_resonance(U0_over_omega)
    if truncation is None:
        truncation = default_truncation(eps_over_omega)
    if bessel is None:
        n, jn = bessel_j_orders(truncation, eps_over_omega)
    else:
        n, jn = bessel
        keep = np.abs(n) <= truncation
        n, jn = n[keep], jn[keep]
    denom = U0_over_omega + n
    rho1 = float(np.sum(jn * jn / denom))
    rho2 = float(np.sum(jn * jn[::-1] / denom))
    return rho1, rho2


def rho2_alternating(eps_over_omega, U0_over_omega, truncation=None):
    """rho2 written as ``sum (-1)^n J_n^2 / (r + n)``, without negative orders."""
    check_resonance(U0_over_omega)
    if truncation is None:
        truncation = default_truncation(eps_over_omega)
    total = 0.0
    for n in range(-truncation, truncation + 1):
        jn = bessel_j(abs(n), eps_over_omega)
        total += (-1) ** (n % 2) * jn * jn / (U0_over_omega + n)
    return total


def truncation_tail(eps_over_omega, truncation):
    """Upper bound on the magnitude of the discarded terms, J_N^2 summed past N."""
    ladder = np.abs(bessel_j_orders(truncation + 10, eps_over_omega)[1][-10:])
    return float(2.0 * np.sum(ladder**2))


def rho_coefficients(params, truncation=None):
    """Second-order coefficients plus the paired and unpaired tunneling frequencies."""
    x = params.eps_over_omega
    r = params.U0_over_omega
    if truncation is None:
        truncation = default_truncation(x)
    rho1, rho2 = rho_sums(x, r, truncation)
    J, omega = params.J, params.omega
    omega1 = J * J / omega * math.hypot(rho1, math.sqrt(8.0) * rho2)
    omega2 = math.sqrt(2.0) * J * bessel_j(0, x)
    return TunnelingCoefficients(rho1=rho1, rho2=rho2, omega1=omega1, omega2=omega2, truncation=truncation)


def find_rho2_zeros(U0_over_omega, lo=0.0, hi=8.0, step=0.005, xtol=1e-13):
    """All sign changes of rho2 in ``eps/omega`` on ``[lo, hi]``, bisected.

    Roots are refined until ``|rho2| < 1e-10`` (or the bracket collapses to
    ``xtol``).  Returns an ascending list.
    """
    if step <= 0 or step > 0.01:
        raise ValueError(f"grid step must be in (0, 0.01], got {step}")
    check_resonance(U0_over_omega)

    def rho2(x):
        return rho_sums(x, U0_over_omega)[1]

    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = [lo + k * step for k in range(count + 1)]
    if grid[-1] < hi:
        grid.append(hi)
    values = [rho2(x) for x in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb > 0:
            continue
        while b - a > xtol:
            mid = 0.5 * (a + b)
            fm = rho2(mid)
            if abs(fm) < 1e-10 and b - a < 1e-9:
                a = b = mid
                break
            if fa * fm <= 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    if values[-1] == 0.0:
        roots.append(grid[-1])
    return sorted(set(roots))


def second_order_generator(params, coeffs):
    """Constant 6x6 generator of the effective model in rescaled time ``omega t``.

    Paired block couples only through ``rho1``/``rho2`` at order ``(J/omega)^2``;
    the unpaired block keeps the first-order ``J_0`` hopping as well.
    """
    e = params.J / params.omega
    j0 = bessel_j(0, params.eps_over_omega)
    r1, r2 = coeffs.rho1, coeffs.rho2
    s = 2.0 * e * e
    g = np.zeros((6, 6))
    g[0, 0] = g[2, 2] = s * r1
    g[1, 1] = 2.0 * s * r1
    g[0, 1] = g[1, 0] = g[1, 2] = g[2, 1] = s * r2
    g[3, 3] = g[5, 5] = -2.0 * s * r1
    g[3, 5] = g[5, 3] = -s * r2
    g[3, 4] = g[4, 3] = g[4, 5] = g[5, 4] = -e * j0
    return g


def analytic_paired_probabilities(coeffs, params, t):
    """(P1, P2, P3) for a pair starting in the middle well.

    ``params`` is accepted for symmetry with the other closed forms; only
    ``coeffs.omega1`` sets the time scale.
    """
    r1, r2 = coeffs.rho1, coeffs.rho2
    denom = r1 * r1 + 8.0 * r2 * r2
    if denom == 0.0:
        raise DegenerateCoefficientsError("rho1 = rho2 = 0: paired dynamics undefined")
    t = np.asarray(t, dtype=float)
    c2 = np.cos(coeffs.omega1 * t) ** 2
    s2 = np.sin(coeffs.omega1 * t) ** 2
    p2 = r1 * r1 / denom + 8.0 * r2 * r2 / denom * c2
    p13 = 4.0 * r2 * r2 / denom * s2
    return p13, p2, p13.copy()


def analytic_unpaired_probabilities(coeffs, t):
    """(P4, P5, P6) starting from |1,0,1>, first-order hopping only."""
    t = np.asarray(t, dtype=float)
    p5 = np.cos(coeffs.omega2 * t) ** 2
    p46 = 0.5 * np.sin(coeffs.omega2 * t) ** 2
    return p46, p5, p46.copy()


def analytic_cdt_exchange(coeffs, params, t, j0_tolerance=1e-3):
    """(P4, P6) starting from |1,1,0> when first-order hopping is switched off.

    Only valid where ``J_0(eps/omega)`` vanishes; the left and right unpaired
    states then swap through the second-order ``rho2`` channel alone.
    """
    j0 = bessel_j(0, params.eps_over_omega)
    if abs(j0) > j0_tolerance:
        raise PreconditionError(f"J_0(eps/omega) = {j0:.3g} is not within {j0_tolerance:g} of zero")
    phase = 2.0 * params.J**2 * coeffs.rho2 / params.omega * np.asarray(t, dtype=float)
    return np.cos(phase) ** 2, np.sin(phase) ** 2
