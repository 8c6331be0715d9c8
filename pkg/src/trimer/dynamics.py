"""Time evolution under the exact and the effective models.

Every trajectory is sampled on a uniform grid locked to the drive phase:
spacing ``T / n`` with ``T = 2 pi / omega`` and ``n >= 100`` chosen so that
at least 2000 samples are produced.  The last sample is the first grid point
at or beyond ``t_end``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from . import effective
from .errors import CoverageError, DomainError, IntegrationError
from .floquet import period_propagators
from .model import (
    FOCK_LABELS,
    PAIRED,
    basis_state,
    decompose_interaction,
    hopping_matrix,
    rotating_frame_phases,
)
from .specfun import bessel_j

MODELS = ("exact", "first-order", "second-order", "closed-form")
DEFAULT_TAU = 200.0
MIN_PER_PERIOD = 100
MIN_SAMPLES = 2000


@dataclass(frozen=True)
class Trajectory:
    model: str
    t: np.ndarray
    P: np.ndarray
    amplitudes: np.ndarray = None

    def __post_init__(self):
        for name in ("t", "P", "amplitudes"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, copy=True)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.t)

    @property
    def norm_error(self):
        """Largest deviation of the summed probabilities from one."""
        return float(np.max(np.abs(self.P.sum(axis=1) - 1.0)))

    def probability(self, index):
        """Column for a 1-based state index or a Fock label."""
        if isinstance(index, str):
            index = FOCK_LABELS.index(index) + 1
        return self.P[:, index - 1]


def sample_grid(omega, t_end, min_per_period=MIN_PER_PERIOD, min_samples=MIN_SAMPLES):
    if not (t_end > 0 and math.isfinite(t_end)):
        raise DomainError(f"t_end must be positive and finite, got {t_end!r}")
    period = 2.0 * math.pi / omega
    per_period = max(min_per_period, math.ceil(min_samples * period / t_end))
    dt = period / per_period
    count = math.ceil(t_end / dt - 1e-9)
    return np.arange(count + 1) * dt, per_period


def _initial_state(initial):
    if isinstance(initial, str):
        return basis_state(initial)
    state = np.asarray(initial, dtype=complex).reshape(6)
    norm = np.vdot(state, state).real
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"initial state must be normalised, |c|^2 sums to {norm!r}")
    return state


def _check_tol(tol):
    if not 1e-12 <= tol <= 1e-4:
        raise DomainError(f"tol must lie in [1e-12, 1e-4], got {tol:g}")


def solve_linear(generator, state0, t, tol):
    """Integrate ``i dc/dt = generator(t) @ c`` and sample at ``t``.

    Adaptive DOP853 with error control on the stacked real and imaginary parts.
    """
    n = len(state0)

    def rhs(time, y):
        c = y[:n] + 1j * y[n:]
        dc = -1j * (generator(time) @ c)
        return np.concatenate([dc.real, dc.imag])

    y0 = np.concatenate([state0.real, state0.imag])
    sol = solve_ivp(rhs, (float(t[0]), float(t[-1])), y0, method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=t)
    if sol.status != 0:
        failed_at = float(sol.t[-1]) if len(sol.t) else float(t[0])
        raise IntegrationError(f"integration failed: {sol.message}", failed_at)
    return (sol.y[:n] + 1j * sol.y[n:]).T


def _trajectory(model, t, amplitudes, keep_amplitudes):
    P = np.abs(amplitudes) ** 2
    return Trajectory(model=model, t=t, P=P, amplitudes=amplitudes if keep_amplitudes else None)


def integrate_exact(params, initial, t_end, tol=1e-10, method="floquet", keep_amplitudes=False):
    """Solve the full driven model from ``initial`` up to ``t_end``.

    ``method="floquet"`` integrates the propagator over one drive period (at
    every output phase) and advances whole periods by repeated multiplication
    with the unitarised monodromy matrix; this keeps the norm drift at
    round-off level over thousands of periods.  ``method="direct"`` integrates
    the state itself in the rotating frame that strips the diagonal phases,
    which is slower and serves as an independent check.
    """
    _check_tol(tol)
    state0 = _initial_state(initial)
    t, per_period = sample_grid(params.omega, t_end)
    if method == "floquet":
        amps = _exact_by_periods(params, state0, len(t), per_period, tol)
    elif method == "direct":
        amps = _exact_direct(params, state0, t, tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    return _trajectory("exact", t, amps, keep_amplitudes)


def _exact_by_periods(params, state0, count, per_period, tol):
    stack = period_propagators(params, per_period, min(tol, 1e-11))
    # polar projection removes the residual non-unitarity before powering
    w, _, vh = np.linalg.svd(stack)
    stack = w @ vh
    mono = stack[-1]
    n_periods = (count - 1) // per_period + 1
    starts = np.empty((n_periods + 1, 6), dtype=complex)
    starts[0] = state0
    for k in range(n_periods):
        starts[k + 1] = mono @ starts[k]
    k = np.arange(count) // per_period
    phase = np.arange(count) % per_period
    return np.einsum("nij,nj->ni", stack[phase], starts[k])


def _exact_direct(params, state0, t, tol):
    offdiag = hopping_matrix(params.J)

    def generator(time):
        theta = rotating_frame_phases(params, time)
        return offdiag * np.exp(1j * (theta[:, None] - theta[None, :]))

    # a(0) = c(0) because every rotating-frame phase vanishes at t = 0
    a = solve_linear(generator, state0, t, tol)
    return a * np.exp(-1j * rotating_frame_phases(params, t))


def integrate_first_order(params, initial, t_end, tol=1e-10, keep_amplitudes=False):
    """High-frequency averaged model with photon-assisted pair hopping.

    With ``U0 = m omega + u`` the pair-breaking hops are dressed by
    ``J_m(eps/omega)`` and a slow phase ``exp(+-i u t)``, while hopping among
    unpaired states carries ``J_0(eps/omega)``.
    """
    _check_tol(tol)
    state0 = _initial_state(initial)
    t, _ = sample_grid(params.omega, t_end)
    dec = decompose_interaction(params)
    x = params.eps_over_omega
    jm = bessel_j(dec.m, x)
    j0 = bessel_j(0, x)
    sign = -1.0 if dec.m % 2 else 1.0
    J = params.J
    r2 = math.sqrt(2.0)
    # rows: paired states, columns: unpaired states (coefficient of exp(i u t))
    pair_break = -r2 * J * jm * np.array([[1.0, 0.0, 0.0], [sign, 0.0, 1.0], [0.0, 0.0, sign]])
    unpaired = -J * j0 * np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    u = dec.u

    def generator(time):
        g = np.zeros((6, 6), dtype=complex)
        ph = complex(math.cos(u * time), math.sin(u * time))
        g[:3, 3:] = pair_break * ph
        g[3:, :3] = pair_break.T * ph.conjugate()
        g[3:, 3:] = unpaired
        return g

    amps = solve_linear(generator, state0, t, tol)
    return _trajectory("first-order", t, amps, keep_amplitudes)


def integrate_second_order(params, coeffs, initial, t_end, tol=1e-10, keep_amplitudes=False):
    """Constant-coefficient second-order model, integrated in ``omega t``."""
    _check_tol(tol)
    state0 = _initial_state(initial)
    if not (math.isfinite(coeffs.rho1) and math.isfinite(coeffs.rho2)):
        raise DomainError("second-order coefficients must be finite")
    t, _ = sample_grid(params.omega, t_end)
    gen = effective.second_order_generator(params, coeffs).astype(complex)
    amps = solve_linear(lambda _s: gen, state0, params.omega * t, tol)
    return _trajectory("second-order", t, amps, keep_amplitudes)


def closed_form_trajectory(params, coeffs, initial, t_end):
    """Closed-form probabilities for the three initial states that admit them.

    ``020`` uses the paired formula, ``101`` the first-order unpaired formula
    and ``110`` the second-order left-right exchange (requires J_0 = 0).
    """
    t, _ = sample_grid(params.omega, t_end)
    P = np.zeros((len(t), 6))
    if initial == "020":
        P[:, 0], P[:, 1], P[:, 2] = effective.analytic_paired_probabilities(coeffs, params, t)
    elif initial == "101":
        P[:, 3], P[:, 4], P[:, 5] = effective.analytic_unpaired_probabilities(coeffs, t)
    elif initial == "110":
        P[:, 3], P[:, 5] = effective.analytic_cdt_exchange(coeffs, params, t)
    else:
        raise DomainError(f"no closed form for initial state {initial!r}; use 020, 101 or 110")
    return Trajectory(model="closed-form", t=t, P=P)


def time_averaged_S(traj, tau=DEFAULT_TAU):
    """Mean total paired probability over ``[0, tau]`` (trapezoidal rule).

    The final partial interval is closed by linear interpolation at ``tau``.
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    t = traj.t
    if t[0] > 0 or t[-1] < tau * (1 - 1e-12):
        raise CoverageError(f"trajectory covers [{t[0]:g}, {t[-1]:g}], need [0, {tau:g}]")
    s = traj.P[:, list(PAIRED)].sum(axis=1)
    inside = t <= tau
    ti, si = t[inside], s[inside]
    if ti[-1] < tau:
        s_tau = np.interp(tau, t, s)
        ti = np.append(ti, tau)
        si = np.append(si, s_tau)
    return float(np.trapezoid(si, ti) / tau)


def oscillation_period(t, signal, min_period=None, max_period=None):
    """Period of the dominant oscillation in ``signal`` by least-squares sinusoid fit.

    Fits ``a + b cos(k t) + c sin(k t)`` on a frequency grid finer than one
    cycle over the record, then polishes the best ``k``.  Fast ripples faster
    than ``min_period`` (default: record length / 100) are ignored.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(signal, dtype=float)
    y = y - y.mean()
    span = t[-1] - t[0]
    if min_period is None:
        min_period = span / 100.0
    if max_period is None:
        max_period = 2.0 * span
    stride = max(1, len(t) // 5000)
    tc, yc = t[::stride], y[::stride]

    def residual(k, tt=t, yy=y):
        basis = np.column_stack([np.ones_like(tt), np.cos(k * tt), np.sin(k * tt)])
        coef, *_ = np.linalg.lstsq(basis, yy, rcond=None)
        return float(np.sum((basis @ coef - yy) ** 2))

    dk = 2 * math.pi / (8.0 * span)
    ks = np.arange(2 * math.pi / max_period, 2 * math.pi / min_period + dk, dk)
    best = ks[int(np.argmin([residual(k, tc, yc) for k in ks]))]
    res = minimize_scalar(residual, bounds=(max(best - dk, 1e-12), best + dk), method="bounded")
    return 2 * math.pi / res.x
