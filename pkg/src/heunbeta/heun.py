"""General Heun equation: parameters, residual operator and an ODE oracle.

The canonical form is

    u'' + (gamma/z + delta/(z-1) + epsilon/(z-a)) u'
        + (alpha*beta*z - q) / (z (z-1) (z-a)) u = 0

with the Fuchsian condition 1 + alpha + beta = gamma + delta + epsilon.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConstraintError, DomainError, StepFailure
from .specfun import GUARD, check_z

__all__ = [
    "HeunParams",
    "SolutionSample",
    "A_EXCLUSION",
    "make_expansion_params",
    "residual",
    "second_derivative",
    "integrate",
    "integrate_grid",
    "wronskian_invariant",
]

#: radius excluded around z = a when the third singularity lies in (0, 1)
A_EXCLUSION = 1e-4
FUCHS_TOL = 1e-12
RK_RTOL = 1e-10


@dataclass(frozen=True)
class HeunParams:
    a: float
    q: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))
        if self.a in (0.0, 1.0):
            raise DomainError(f"singularity a={self.a} collides with 0 or 1")
        lhs = 1.0 + self.alpha + self.beta
        rhs = self.gamma + self.delta + self.epsilon
        scale = max(1.0, abs(self.alpha), abs(self.beta), abs(self.gamma), abs(self.delta), abs(self.epsilon))
        if abs(lhs - rhs) > FUCHS_TOL * scale:
            raise ConstraintError(f"Fuchsian condition violated: 1+alpha+beta={lhs!r}, gamma+delta+epsilon={rhs!r}")

    def with_q(self, q: float) -> "HeunParams":
        return dataclasses.replace(self, q=float(q))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def p_coefficient(self, z: float) -> float:
        return self.gamma / z + self.delta / (z - 1.0) + self.epsilon / (z - self.a)

    def r_coefficient(self, z: float) -> float:
        return (self.alpha * self.beta * z - self.q) / (z * (z - 1.0) * (z - self.a))


@dataclass(frozen=True)
class SolutionSample:
    z: float
    u: float
    u_prime: float
    u_second: float


def make_expansion_params(a: float, q: float, gamma: float, delta: float, epsilon: float) -> HeunParams:
    """Heun parameters with beta = 0 and alpha closed by the Fuchsian condition."""
    return HeunParams(a=a, q=q, alpha=gamma + delta + epsilon - 1.0, beta=0.0, gamma=gamma, delta=delta, epsilon=epsilon)


def _check_point(params: HeunParams, z: float) -> float:
    z = check_z(z)
    if abs(z - params.a) < A_EXCLUSION:
        raise DomainError(f"z={z} within {A_EXCLUSION} of the singularity a={params.a}")
    return z


def second_derivative(params: HeunParams, z: float, u: float, up: float) -> float:
    """u'' forced by the equation, given u and u'."""
    return -params.p_coefficient(z) * up - params.r_coefficient(z) * u


def residual(params: HeunParams, s: SolutionSample) -> float:
    """Heun operator applied to a sample, scaled by max(1, |u''|, |u'|, |u|)."""
    z = _check_point(params, s.z)
    value = s.u_second + params.p_coefficient(z) * s.u_prime + params.r_coefficient(z) * s.u
    return value / max(1.0, abs(s.u_second), abs(s.u_prime), abs(s.u))


def _check_interval(params: HeunParams, z0: float, z1: float) -> None:
    lo, hi = sorted((float(z0), float(z1)))
    if lo < GUARD or hi > 1.0 - GUARD:
        raise DomainError(f"interval [{lo}, {hi}] leaves the guard band")
    if lo - A_EXCLUSION < params.a < hi + A_EXCLUSION:
        raise DomainError(f"interval [{lo}, {hi}] reaches the singularity a={params.a}")


def integrate(
    params: HeunParams,
    z0: float,
    u0: float,
    up0: float,
    z1: float,
    z_eval=None,
    rtol: float = RK_RTOL,
) -> list[SolutionSample]:
    """Integrate the equation from ``z0`` to ``z1`` with an adaptive embedded RK pair.

    Samples are returned at ``z_eval`` when given, otherwise at the accepted
    steps.  ``u''`` is rebuilt from the equation at each sample.
    """
    _check_interval(params, z0, z1)
    scale = max(1.0, abs(u0), abs(up0))

    def rhs(z, y):
        return [y[1], second_derivative(params, z, y[0], y[1])]

    if z_eval is not None:
        z_eval = np.asarray(z_eval, dtype=float)
    sol = solve_ivp(
        rhs,
        (float(z0), float(z1)),
        [float(u0), float(up0)],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2 * scale,
        t_eval=z_eval,
    )
    if sol.status != 0:
        raise StepFailure(sol.message)
    return [
        SolutionSample(z, u, up, second_derivative(params, z, u, up))
        for z, u, up in zip(sol.t, sol.y[0], sol.y[1])
    ]


def integrate_grid(params: HeunParams, z0: float, u0: float, up0: float, zs) -> list[SolutionSample]:
    """Integrate outward from ``z0`` in both directions and sample on ``zs``."""
    zs = np.sort(np.asarray(zs, dtype=float))
    left = zs[zs < z0][::-1]
    right = zs[zs >= z0]
    out: list[SolutionSample] = []
    if len(left):
        out += integrate(params, z0, u0, up0, left[-1], z_eval=left)[::-1]
    if len(right):
        if right[0] == z0:
            out.append(SolutionSample(z0, u0, up0, second_derivative(params, z0, u0, up0)))
            right = right[1:]
        if len(right):
            out += integrate(params, z0, u0, up0, right[-1], z_eval=right)
    return out


def wronskian_invariant(params: HeunParams, s1: SolutionSample, s2: SolutionSample) -> float:
    """W(z) |z|^gamma |z-1|^delta |z-a|^epsilon, constant along solutions by Abel's identity."""
    z = s1.z
    w = s1.u * s2.u_prime - s2.u * s1.u_prime
    return w * abs(z) ** params.gamma * abs(z - 1.0) ** params.delta * abs(z - params.a) ** params.epsilon
