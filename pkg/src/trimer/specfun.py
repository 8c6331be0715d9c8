"""Integer-order Bessel functions of the first kind.

Values come from Miller's downward recurrence normalised with
``J_0 + 2 * (J_2 + J_4 + ...) = 1``.  The recurrence is stable in the
downward direction for every order, so a single sweep yields the whole
ladder ``J_0 .. J_nmax`` at one argument.
"""

import math

import numpy as np

from .errors import DomainError

MAX_ORDER = 10**6
SERIES_BELOW = 1e-3

_RESCALE = 1e250
_TINY = 1e-300
_LOG_TINY = math.log(_TINY)


def _check_argument(x):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Bessel argument must be finite, got {x!r}")
    return x


def _check_order(n):
    if isinstance(n, (bool, np.bool_)) or int(n) != n:
        raise DomainError(f"Bessel order must be an integer, got {n!r}")
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise DomainError(f"|n| = {abs(n)} exceeds {MAX_ORDER}")
    return n


def _start_order(nmax, x):
    top = max(nmax, x)
    m = int(top) + 20 + int(math.sqrt(40.0 * top))
    return m + (m % 2)


def _negligible(n, x):
    # |J_n(x)| <= (x/2)^n / n!  for n >= 0, x >= 0
    if n <= x + 40:
        return False
    return n * (math.log(x) - math.log(2.0)) - math.lgamma(n + 1.0) < _LOG_TINY


def _miller(nmax, x):
    """J_0(x) .. J_nmax(x) for x > 0."""
    start = _start_order(nmax, x)
    out = np.zeros(nmax + 1)
    two_over_x = 2.0 / x
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            out /= _RESCALE
            norm /= _RESCALE
        km1 = k - 1
        if km1 <= nmax:
            out[km1] = j_cur
        if km1 > 0 and km1 % 2 == 0:
            norm += 2.0 * j_cur
    norm += j_cur
    return out / norm


def _series(nmax, x):
    """Ascending series, used for small ``x`` where 2k/x overflows the recurrence."""
    q = -0.25 * x * x
    out = np.zeros(nmax + 1)
    lead = 1.0
    for n in range(nmax + 1):
        if n:
            lead *= 0.5 * x / n
        if lead == 0.0:
            break
        term, total, k = lead, lead, 0
        while abs(term) > 1e-17 * abs(total):
            k += 1
            term *= q / (k * (k + n))
            total += term
        out[n] = total
    return out


def bessel_j_ladder(nmax, x):
    """Return ``J_0(x), ..., J_nmax(x)`` as an array of length ``nmax + 1``."""
    x = _check_argument(x)
    nmax = _check_order(nmax)
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    ax = abs(x)
    out = _series(nmax, ax) if ax < SERIES_BELOW else _miller(nmax, ax)
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_j_orders(nmax, x):
    """Return ``(orders, values)`` for ``n = -nmax .. nmax``.

    Negative orders follow from ``J_{-n} = (-1)^n J_n`` applied to the same
    ladder, so the reflection identity holds bit for bit.
    """
    pos = bessel_j_ladder(nmax, x)
    neg = pos[:0:-1].copy()
    neg[(nmax - np.arange(nmax)) % 2 == 1] *= -1.0
    orders = np.arange(-nmax, nmax + 1)
    return orders, np.concatenate([neg, pos])


def bessel_j(n, x):
    """Bessel function of the first kind of integer order ``n``.

    >>> bessel_j(0, 0.0)
    1.0
    """
    n = _check_order(n)
    x = _check_argument(x)
    if n < 0:
        value = bessel_j(-n, x)
        return -value if n % 2 else value
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if _negligible(n, abs(x)):
        return 0.0
    return float(bessel_j_ladder(n, x)[n])
