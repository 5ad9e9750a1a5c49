"""Expansion of Heun solutions in incomplete Beta functions.

For alpha*beta = 0 the equation admits

    u(z) = sum_n a_n B_z(1 - gamma + n, 1 - delta)

whose coefficients obey R_n a_n + Q_{n-1} a_{n-1} + P_{n-2} a_{n-2} = 0 with

    R_n = a n (n - gamma)
    Q_n = -a n (n + 1 - gamma - delta) - (n + epsilon)(n + 1 - gamma) - q
    P_n = (n + 2 - gamma - delta)(n + epsilon).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, ConvergenceError, PoleError
from .heun import HeunParams, SolutionSample, _check_point
from .specfun import POLE_TOL, incomplete_beta, nonpositive_integer

__all__ = [
    "TruncationReason",
    "ExpansionBasis",
    "ExpansionCoefficients",
    "recurrence_coeffs",
    "recurrence_residuals",
    "compute_coefficients",
    "basis_values",
    "evaluate",
    "evaluate_grid",
]

log = logging.getLogger(__name__)

N_MAX = 3000
SERIES_RTOL = 1e-14
STREAK = 3
TERMINATION_RTOL = 1e-13
# extra headroom so the coefficient list outlasts evaluate()'s stopping test
PROXY_MARGIN = 1e-3


class TruncationReason(str, enum.Enum):
    converged = "converged"
    terminated = "terminated"
    cap_reached = "cap_reached"


@dataclass(frozen=True)
class ExpansionBasis:
    """Basis members B_z(gamma0 + n, delta_shared) with gamma0 = 1 - gamma, delta_shared = 1 - delta."""

    gamma: float
    delta: float

    def __post_init__(self):
        if nonpositive_integer(1.0 - self.gamma) is not None:
            raise PoleError(f"gamma={self.gamma} is a positive integer; the basis hits a pole")

    @property
    def gamma0(self) -> float:
        return 1.0 - self.gamma

    @property
    def delta_shared(self) -> float:
        return 1.0 - self.delta

    def first_parameter(self, n: int) -> float:
        return self.gamma0 + n

    def member(self, n: int, z: float) -> float:
        return incomplete_beta(self.first_parameter(n), self.delta_shared, z)

    def member_derivative(self, n: int, z: float) -> float:
        return z ** (self.first_parameter(n) - 1.0) * (1.0 - z) ** (self.delta_shared - 1.0)


@dataclass
class ExpansionCoefficients:
    values: np.ndarray
    truncation_reason: TruncationReason
    normalization: float = 1.0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0


def _rqp(a, q, gamma, delta, epsilon, n):
    R = a * n * (n - gamma)
    Q = -a * n * (n + 1.0 - gamma - delta) - (n + epsilon) * (n + 1.0 - gamma) - q
    P = (n + 2.0 - gamma - delta) * (n + epsilon)
    return R, Q, P


def recurrence_coeffs(params: HeunParams, n: int) -> tuple[float, float, float]:
    """(R_n, Q_n, P_n) of the three-term recurrence."""
    return _rqp(params.a, params.q, params.gamma, params.delta, params.epsilon, n)


def _require_expandable(params: HeunParams) -> None:
    if abs(params.alpha * params.beta) > 1e-14 * max(1.0, abs(params.alpha), abs(params.beta)):
        raise ConstraintError("the Beta-function expansion needs alpha*beta = 0")


def _check_gamma(gamma: float, n_max: int) -> None:
    r = round(gamma)
    if 1 <= r <= n_max and abs(gamma - r) <= POLE_TOL:
        raise PoleError(f"gamma={gamma} is a positive integer: R_{r} vanishes")


def compute_coefficients(
    params: HeunParams,
    n_max: int = N_MAX,
    z_max: float | None = None,
    tol: float = SERIES_RTOL,
) -> ExpansionCoefficients:
    """Coefficients a_0 = 1, a_1, ... by forward recurrence.

    Stops on termination (two consecutive coefficients below
    ``TERMINATION_RTOL`` times the running maximum), on convergence of the
    proxy terms |a_n| n^2 z_max^n when ``z_max`` is given, or at ``n_max``.
    """
    _require_expandable(params)
    _check_gamma(params.gamma, n_max)
    vals = [1.0]
    prev2, prev1 = 0.0, 1.0
    peak = 1.0
    proxy_peak = 1.0
    streak = 0
    small = 0
    reason = TruncationReason.cap_reached
    for n in range(1, n_max + 1):
        R, _, _ = recurrence_coeffs(params, n)
        _, Q, _ = recurrence_coeffs(params, n - 1)
        P = recurrence_coeffs(params, n - 2)[2] if n >= 2 else 0.0
        if R == 0.0:
            raise PoleError(f"R_{n} vanishes")
        an = -(Q * prev1 + P * prev2) / R
        if not np.isfinite(an):
            log.warning("coefficients overflowed at n=%d", n)
            break
        vals.append(an)
        peak = max(peak, abs(an))
        if abs(an) <= TERMINATION_RTOL * peak:
            small += 1
            if small == 2:
                vals = vals[:-2]
                reason = TruncationReason.terminated
                break
        else:
            small = 0
        if z_max is not None:
            proxy = abs(an) * (n + 1) ** 2 * z_max**n
            proxy_peak = max(proxy_peak, proxy)
            if proxy <= PROXY_MARGIN * tol * proxy_peak:
                streak += 1
                if streak >= STREAK:
                    reason = TruncationReason.converged
                    break
            else:
                streak = 0
        prev2, prev1 = prev1, an
    return ExpansionCoefficients(np.array(vals), reason, meta={"n_max": n_max, "z_max": z_max})


def recurrence_residuals(params: HeunParams, coeffs: ExpansionCoefficients) -> np.ndarray:
    """Relative residual of the recurrence at every n >= 1 covered by ``coeffs``."""
    a = coeffs.values
    out = []
    for n in range(1, len(a)):
        R = recurrence_coeffs(params, n)[0]
        Q = recurrence_coeffs(params, n - 1)[1]
        P = recurrence_coeffs(params, n - 2)[2] if n >= 2 else 0.0
        am2 = a[n - 2] if n >= 2 else 0.0
        parts = (R * a[n], Q * a[n - 1], P * am2)
        out.append(abs(sum(parts)) / max(max(abs(x) for x in parts), 1e-300))
    return np.array(out)


def basis_values(gamma: float, delta: float, z: float, count: int) -> np.ndarray:
    """B_z(1 - gamma + n, 1 - delta) for n = 0 .. count-1.

    The top member is summed directly and the rest follow from the
    down-shift B(p) = [z^p (1-z)^s + (p + s) B(p+1)] / p, which is stable
    because every step damps the inherited error by roughly z.
    """
    b, s = 1.0 - gamma, 1.0 - delta
    out = np.empty(count)
    out[-1] = incomplete_beta(b + count - 1, s, z)
    tail = (1.0 - z) ** s
    for n in range(count - 2, -1, -1):
        p = b + n
        out[n] = (z**p * tail + (p + s) * out[n + 1]) / p
    return out


def evaluate(params: HeunParams, coeffs: ExpansionCoefficients, z: float, tol: float = SERIES_RTOL) -> SolutionSample:
    """Sum the series and its first two derivatives at ``z``.

    Each basis member has u_n' = z^(n-gamma) (1-z)^(-delta) and
    u_n'' = -((gamma - n)/z + delta/(z - 1)) u_n'.  Summation stops after
    three consecutive nonzero terms below ``tol`` times the partial sums;
    terminated coefficient lists are summed in full.
    """
    z = _check_point(params, z)
    a = coeffs.values
    if len(a) == 0:
        return SolutionSample(z, 0.0, 0.0, 0.0)
    g, d = params.gamma, params.delta
    B = basis_values(g, d, z, len(a))
    lead = (1.0 - z) ** (-d)
    u = up = upp = 0.0
    streak = 0
    done = coeffs.truncation_reason is TruncationReason.terminated
    for n, an in enumerate(a):
        if an == 0.0:
            continue
        d1 = z ** (n - g) * lead
        d2 = -((g - n) / z + d / (z - 1.0)) * d1
        t0, t1, t2 = an * B[n], an * d1, an * d2
        u += t0
        up += t1
        upp += t2
        if done:
            continue
        if abs(t0) <= tol * abs(u) and abs(t1) <= tol * abs(up) and abs(t2) <= tol * abs(upp):
            streak += 1
            if streak >= STREAK:
                return SolutionSample(z, u, up, upp)
        else:
            streak = 0
    if not done:
        raise ConvergenceError(f"series not converged at z={z} after {len(a)} coefficients")
    return SolutionSample(z, u, up, upp)


def evaluate_grid(params: HeunParams, zs, n_max: int = N_MAX, tol: float = SERIES_RTOL):
    """Compute coefficients once for the grid and evaluate at every point."""
    zs = [float(z) for z in zs]
    coeffs = compute_coefficients(params, n_max=n_max, z_max=max(zs), tol=tol)
    return coeffs, [evaluate(params, coeffs, z, tol=tol) for z in zs]
