"""Real-argument special functions used by the Heun expansion.

Everything here works on plain Python floats.  The Gauss function is summed
directly as a power series, which is all the expansion needs since its
arguments are z or z**2 with z inside (0, 1).  Close to |x| = 1 the series
would need millions of terms, so that band is handed to mpmath.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.special import rgamma

from .errors import DivergenceError, DomainError, PoleError

__all__ = [
    "GUARD",
    "POLE_TOL",
    "check_z",
    "nonpositive_integer",
    "pochhammer",
    "incomplete_beta",
    "beta_contiguous_up",
    "beta_contiguous_down",
    "gauss_2f1",
    "gauss_2f1_derivatives",
    "clausen_3f2_unit",
    "terminating_3f2_unit",
    "saalschutz_3f2",
]

#: half-width of the excluded band next to z = 0 and z = 1
GUARD = 1e-6
#: distance below which a parameter counts as a non-positive integer
POLE_TOL = 1e-9

_SERIES_CAP = 100_000
_SERIES_RTOL = 1e-16
_SERIES_STREAK = 3
# series is abandoned for mpmath beyond this |x|
_SERIES_XMAX = 0.99

_UNIT_CAP = 1_000_000
_UNIT_RTOL = 1e-13
_RICHARDSON_DEPTH = 8


def check_z(z: float) -> float:
    """Return ``z`` as a float, raising DomainError outside the guard band."""
    z = float(z)
    if not (GUARD <= z <= 1.0 - GUARD):
        raise DomainError(f"z={z!r} outside [{GUARD}, {1 - GUARD}]")
    return z


def nonpositive_integer(x: float, tol: float = POLE_TOL) -> int | None:
    """Return ``m >= 0`` if ``x`` is within ``tol`` of ``-m``, else None."""
    r = round(x)
    if r <= 0 and abs(x - r) <= tol:
        return int(-r)
    return None


def pochhammer(x: float, k: int) -> float:
    """Rising factorial ``x (x+1) ... (x+k-1)``; ``(x)_0 = 1``."""
    if k < 0 or int(k) != k:
        raise DomainError(f"Pochhammer order must be a non-negative integer, got {k!r}")
    out = 1.0
    for j in range(int(k)):
        out *= x + j
    return out


def _termination_order(upper) -> int | None:
    """Smallest m such that some upper parameter equals -m."""
    orders = [m for m in (nonpositive_integer(a) for a in upper) if m is not None]
    return min(orders) if orders else None


def _check_lower(upper, lower) -> int | None:
    """Validate lower parameters; return the termination order, if any."""
    stop = _termination_order(upper)
    for b in lower:
        m = nonpositive_integer(b)
        if m is not None and (stop is None or stop >= m + 1):
            # term m+1 would divide by zero before the series terminates
            raise PoleError(f"lower parameter {b!r} is a non-positive integer")
    return stop


def _series_pfq(upper, lower, x: float, nterms: int | None = None) -> float:
    """Sum a pFq power series with the term-ratio stopping rule."""
    total = 1.0
    term = 1.0
    streak = 0
    cap = _SERIES_CAP if nterms is None else nterms
    for k in range(cap):
        num = 1.0
        for a in upper:
            num *= a + k
        den = float(k + 1)
        for b in lower:
            den *= b + k
        term *= num / den * x
        total += term
        if nterms is not None:
            continue
        if abs(term) <= _SERIES_RTOL * abs(total):
            streak += 1
            if streak >= _SERIES_STREAK:
                return total
        else:
            streak = 0
    if nterms is not None:
        return total
    raise DivergenceError(f"pFq series did not converge in {cap} terms at x={x!r}")


def gauss_2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; x) for real -1 <= x <= 1.

    Terminating series are summed exactly.  At x = 1 the Gauss summation
    formula is used and requires c - a - b > 0.
    """
    a, b, c, x = float(a), float(b), float(c), float(x)
    stop = _check_lower((a, b), (c,))
    if abs(x) > 1.0:
        raise DomainError(f"|x| > 1 not supported (x={x!r})")
    if x == 0.0:
        return 1.0
    if stop is not None:
        return _series_pfq((a, b), (c,), x, nterms=stop)
    if x == 1.0:
        s = c - a - b
        if s <= 0:
            raise DivergenceError(f"2F1 diverges at x=1 (c-a-b={s!r})")
        return _gauss_sum(a, b, c)
    if abs(x) > _SERIES_XMAX:
        return float(mpmath.hyp2f1(a, b, c, x))
    return _series_pfq((a, b), (c,), x)


def _gauss_sum(a: float, b: float, c: float) -> float:
    # Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)), with rgamma absorbing poles
    return float(math.gamma(c) * math.gamma(c - a - b) * rgamma(c - a) * rgamma(c - b))


def gauss_2f1_derivatives(a: float, b: float, c: float, x: float, order: int = 3) -> np.ndarray:
    """Return ``[F, F', ..., F^(order)]`` of 2F1(a, b; c; x) with respect to x.

    Uses d^k/dx^k 2F1(a,b;c;x) = (a)_k (b)_k / (c)_k * 2F1(a+k, b+k; c+k; x).
    """
    out = np.empty(order + 1)
    for k in range(order + 1):
        scale = pochhammer(a, k) * pochhammer(b, k)
        if scale == 0.0:
            out[k] = 0.0
            continue
        out[k] = scale / pochhammer(c, k) * gauss_2f1(a + k, b + k, c + k, x)
    return out


def incomplete_beta(p: float, q: float, z: float) -> float:
    """Incomplete Beta function B_z(p, q) = int_0^z t^(p-1) (1-t)^(q-1) dt.

    Evaluated as (z^p / p) 2F1(p, 1-q; p+1; z), which continues the integral
    analytically to negative non-integer ``p``.
    """
    p, q = float(p), float(q)
    z = check_z(z)
    if nonpositive_integer(p) is not None:
        raise PoleError(f"incomplete Beta has a pole at p={p!r}")
    return z**p / p * gauss_2f1(p, 1.0 - q, p + 1.0, z)


def beta_contiguous_up(p: float, q: float, z: float) -> float:
    """B_z(p, q) rebuilt from B_z(p+1, q).

    B_z(p, q) = [z^p (1-z)^q + (p+q) B_z(p+1, q)] / p
    """
    z = check_z(z)
    if nonpositive_integer(p) is not None:
        raise PoleError(f"up-shift relation divides by p={p!r}")
    return (z**p * (1.0 - z) ** q + (p + q) * incomplete_beta(p + 1.0, q, z)) / p


def beta_contiguous_down(p: float, q: float, z: float) -> float:
    """B_z(p, q) rebuilt from B_z(p-1, q).

    B_z(p, q) = [(p-1) B_z(p-1, q) - z^(p-1) (1-z)^q] / (p+q-1)
    """
    z = check_z(z)
    if abs(p + q - 1.0) <= POLE_TOL:
        raise PoleError(f"down-shift relation divides by p+q-1={p + q - 1.0!r}")
    if nonpositive_integer(p - 1.0) is not None:
        raise PoleError(f"B_z(p-1, q) has a pole at p-1={p - 1.0!r}")
    return ((p - 1.0) * incomplete_beta(p - 1.0, q, z) - z ** (p - 1.0) * (1.0 - z) ** q) / (
        p + q - 1.0
    )


def terminating_3f2_unit(a1, a2, a3, b1, b2) -> float:
    """Finite sum of a 3F2 at unit argument that terminates via an upper parameter."""
    upper = (float(a1), float(a2), float(a3))
    lower = (float(b1), float(b2))
    stop = _check_lower(upper, lower)
    if stop is None:
        raise DomainError("no upper parameter is a non-positive integer")
    return _series_pfq(upper, lower, 1.0, nterms=stop)


def saalschutz_3f2(a1, a2, a3, b1, b2) -> float:
    """Closed form of a balanced terminating 3F2 at unit argument.

    With upper (-n, a, b) and lower (c, d), d = 1 + a + b - c - n,
    Saalschuetz's theorem gives

        3F2 = (c-a)_n (c-b)_n / ((c)_n (c-a-b)_n)

    i.e. Gamma(c-a+n) Gamma(c-b+n) Gamma(c) Gamma(c-a-b) divided by
    Gamma(c-a) Gamma(c-b) Gamma(c+n) Gamma(c-a-b+n).  The Pochhammer form is
    evaluated because it stays finite when individual Gammas hit poles.
    """
    upper = [float(a1), float(a2), float(a3)]
    lower = [float(b1), float(b2)]
    _check_lower(upper, lower)
    orders = [nonpositive_integer(x) for x in upper]
    idx = min((i for i, m in enumerate(orders) if m is not None), key=lambda i: orders[i], default=None)
    if idx is None:
        raise DomainError("Saalschuetz summation needs a non-positive integer upper parameter")
    n = orders[idx]
    a, b = (upper[i] for i in range(3) if i != idx)
    c, d = lower
    excess = c + d - sum(upper)
    if abs(excess - 1.0) > 1e-9:
        raise DomainError(f"series is not balanced (parametric excess {excess!r} != 1)")
    num = pochhammer(c - a, n) * pochhammer(c - b, n)
    den = pochhammer(c, n) * pochhammer(c - a - b, n)
    if den == 0.0:
        raise PoleError("Saalschuetz denominator vanishes")
    return num / den


def clausen_3f2_unit(a1, a2, a3, b1, b2) -> float:
    """Clausen function 3F2(a1, a2, a3; b1, b2; 1).

    Terminating series are summed exactly; balanced ones (parametric excess 1)
    go through Saalschuetz's closed form.  Otherwise the partial sums are
    extrapolated in powers of 1/n, which is how the tail of a unit-argument
    series with parametric excess s behaves: S - S_n ~ n^-s (c0 + c1/n + ...).
    """
    upper = (float(a1), float(a2), float(a3))
    lower = (float(b1), float(b2))
    stop = _check_lower(upper, lower)
    excess = sum(lower) - sum(upper)
    if stop is not None:
        if abs(excess - 1.0) <= 1e-9:
            return saalschutz_3f2(*upper, *lower)
        return _series_pfq(upper, lower, 1.0, nterms=stop)
    if excess <= 0.0:
        raise DivergenceError(f"3F2 diverges at unit argument (parametric excess {excess!r})")
    return _richardson_unit(upper, lower, excess)


def _unit_terms(upper, lower, start_term: float, k0: int, k1: int) -> np.ndarray:
    """Terms t_k0 .. t_{k1-1} of a unit-argument series, given t_k0."""
    k = np.arange(k0, k1 - 1, dtype=float)
    ratio = np.ones_like(k)
    for a in upper:
        ratio *= a + k
    for b in lower:
        ratio /= b + k
    ratio /= k + 1.0
    out = np.empty(k1 - k0)
    out[0] = start_term
    out[1:] = start_term * np.cumprod(ratio)
    return out


def _richardson_unit(upper, lower, excess: float) -> float:
    scale = max([1.0] + [abs(v) for v in (*upper, *lower)])
    n = int(max(64, 8 * scale))
    terms = _unit_terms(upper, lower, 1.0, 0, n)
    partial = math.fsum(terms)
    last = terms[-1]
    prev = [partial]
    best = partial
    while 2 * n <= _UNIT_CAP:
        r = 1.0
        for a in upper:
            r *= a + n - 1
        for b in lower:
            r /= b + n - 1
        r /= n
        chunk = _unit_terms(upper, lower, last * r, n, 2 * n)
        partial += math.fsum(chunk)
        last = chunk[-1]
        n *= 2
        row = [partial]
        for m in range(1, min(len(prev) + 1, _RICHARDSON_DEPTH)):
            f = 2.0 ** (excess + m - 1)
            row.append((f * row[m - 1] - prev[m - 1]) / (f - 1.0))
        if len(row) >= 3 and abs(row[-1] - best) <= _UNIT_RTOL * abs(row[-1]):
            return row[-1]
        best = row[-1]
        prev = row
    return best
