"""Truncated derivative arrays ``[f, f', f'', f''']`` at a single point.

Closed-form solutions are products of powers and hypergeometric functions;
multiplying their jets with the Leibniz rule gives exact analytic
derivatives without finite differences.
"""

from math import comb

import numpy as np

ORDER = 3


def mul(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = min(len(f), len(g))
    out = np.zeros(n)
    for k in range(n):
        out[k] = sum(comb(k, j) * f[j] * g[k - j] for j in range(k + 1))
    return out


def power(x: float, m: float, order: int = ORDER) -> np.ndarray:
    """Jet of t -> t**m at t = x."""
    out = np.empty(order + 1)
    c = 1.0
    for k in range(order + 1):
        out[k] = c * x ** (m - k) if c != 0.0 else 0.0
        c *= m - k
    return out


def reflected_power(x: float, m: float, order: int = ORDER) -> np.ndarray:
    """Jet of t -> (1 - t)**m at t = x."""
    out = power(1.0 - x, m, order)
    out[1::2] *= -1.0
    return out


def compose_square(F: np.ndarray, x: float) -> np.ndarray:
    """Jet of t -> F(t**2) at t = x, given the jet of F at x**2."""
    return np.array(
        [
            F[0],
            2.0 * x * F[1],
            2.0 * F[1] + 4.0 * x**2 * F[2],
            12.0 * x * F[2] + 8.0 * x**3 * F[3],
        ]
    )


def polynomial(coef, x: float, order: int = ORDER) -> np.ndarray:
    """Jet of a polynomial given by ascending coefficients."""
    p = np.polynomial.Polynomial(coef)
    out = np.empty(order + 1)
    for k in range(order + 1):
        out[k] = p(x)
        p = p.deriv()
    return out
