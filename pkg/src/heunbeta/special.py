"""The two-term (even/odd decoupled) case a = -1, delta = -epsilon, q = (gamma-1) epsilon.

Here Q_n vanishes identically, odd coefficients are zero and the even ones
are hypergeometric:

    a_{2k} = (epsilon/2)_k (1 + (epsilon-gamma)/2)_k / (k! (1 - gamma/2)_k).

The derivative v = u' is an explicit combination of two Gauss functions of
z**2, and u is recovered from v through the equation itself:

    u = (z (z^2 - 1) v' + (gamma (z^2 - 1) - 2 epsilon z) v) / q.

Also provided: the a = -1, q = 0, delta = epsilon hypergeometric pair used to
validate the ODE integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import rgamma

from . import _jets
from .errors import ConstraintError, DomainError, PoleError, QuadratureError
from .heun import HeunParams, SolutionSample
from .series import ExpansionCoefficients, TruncationReason
from .specfun import (
    POLE_TOL,
    check_z,
    clausen_3f2_unit,
    gauss_2f1_derivatives,
    nonpositive_integer,
    pochhammer,
)

__all__ = [
    "SpecialCaseParams",
    "SolutionConstants",
    "SERIES_WEIGHTS",
    "QUADRATURE_SCALE",
    "special_coefficients",
    "v_jet",
    "v_fundamental",
    "solution_from_v",
    "u_at_zero",
    "quadrature_solution",
    "u_at_one",
    "match_constants",
    "hypergeometric_pair_params",
    "reference_eq27",
]

#: (C1, C2) reproducing the a_0 = 1 Beta series; found by matching u and u' at z = 0.5
SERIES_WEIGHTS = (1.0, 0.0)
#: per-branch factor mapping closed-form constants onto the quadrature form
QUADRATURE_SCALE = (1.0, 1.0)


@dataclass(frozen=True)
class SpecialCaseParams:
    gamma: float
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        r = round(self.gamma)
        if r >= 1 and abs(self.gamma - r) <= POLE_TOL:
            raise PoleError(f"gamma={self.gamma} is a positive integer")

    @property
    def q(self) -> float:
        return (self.gamma - 1.0) * self.epsilon

    def heun(self) -> HeunParams:
        g, e = self.gamma, self.epsilon
        return HeunParams(a=-1.0, q=self.q, alpha=g - 1.0, beta=0.0, gamma=g, delta=-e, epsilon=e)

    def branch1(self) -> tuple[float, float, float]:
        g, e = self.gamma, self.epsilon
        return e / 2.0, 1.0 + (e - g) / 2.0, 1.0 - g / 2.0

    def branch2(self) -> tuple[float, float, float]:
        g, e = self.gamma, self.epsilon
        return 1.0 + e / 2.0, (e + g) / 2.0, 1.0 + g / 2.0


@dataclass(frozen=True)
class SolutionConstants:
    C1: float
    C2: float


def special_coefficients(p: SpecialCaseParams, K: int) -> ExpansionCoefficients:
    """a_0 .. a_{2K}: zeros at odd n, explicit Pochhammer ratios at even n."""
    g, e = p.gamma, p.epsilon
    lower = 1.0 - g / 2.0
    m = nonpositive_integer(lower)
    if m is not None and m < K:
        raise PoleError(f"(1 - gamma/2)_k vanishes for k > {m}")
    vals = np.zeros(2 * K + 1)
    for k in range(K + 1):
        vals[2 * k] = (
            pochhammer(e / 2.0, k) * pochhammer(1.0 + (e - g) / 2.0, k) / (math.factorial(k) * pochhammer(lower, k))
        )
    return ExpansionCoefficients(vals, TruncationReason.cap_reached, meta={"K": K})


def v_jet(p: SpecialCaseParams, c: SolutionConstants, z: float) -> np.ndarray:
    """[v, v', v'', v'''] at z."""
    g, e = p.gamma, p.epsilon
    x = z * z
    out = np.zeros(_jets.ORDER + 1)
    damp = _jets.reflected_power(z, e)
    if c.C1 != 0.0:
        F = _jets.compose_square(gauss_2f1_derivatives(*p.branch1(), x), z)
        out += c.C1 * _jets.mul(_jets.mul(damp, _jets.power(z, -g)), F)
    if c.C2 != 0.0:
        F = _jets.compose_square(gauss_2f1_derivatives(*p.branch2(), x), z)
        out += c.C2 * _jets.mul(damp, F)
    return out


def v_fundamental(p: SpecialCaseParams, c: SolutionConstants, z: float) -> float:
    """v = C1 (1-z)^eps z^-gamma F1(z^2) + C2 (1-z)^eps F2(z^2)."""
    return float(v_jet(p, c, check_z(z))[0])


def _u_from_v_jet(p: SpecialCaseParams, v: np.ndarray, z: float) -> np.ndarray:
    g, e = p.gamma, p.epsilon
    A = _jets.polynomial([0.0, -1.0, 0.0, 1.0], z)
    B = _jets.polynomial([-g, -2.0 * e, g], z)
    dv = np.append(v[1:], 0.0)
    return (_jets.mul(A, dv) + _jets.mul(B, v))[:3] / p.q


def solution_from_v(p: SpecialCaseParams, c: SolutionConstants, z: float) -> SolutionSample:
    """u, u', u'' from the closed form, all analytic."""
    z = check_z(z)
    if p.q == 0.0:
        raise DomainError("q = 0: u cannot be recovered from v")
    u = _u_from_v_jet(p, v_jet(p, c, z), z)
    return SolutionSample(z, float(u[0]), float(u[1]), float(u[2]))


def u_at_zero(p: SpecialCaseParams, c: SolutionConstants) -> float:
    """Limit of u at z = 0.

    Only the second branch contributes (its v is regular there and the
    z v' term drops out); the first branch behaves like z^(1 - gamma).
    """
    if p.q == 0.0:
        raise DomainError("q = 0: u cannot be recovered from v")
    if c.C1 != 0.0 and p.gamma >= 1.0:
        raise DomainError("first branch is singular at z = 0 for gamma >= 1")
    if c.C2 == 0.0:
        return 0.0
    e = p.epsilon
    F = _jets.compose_square(gauss_2f1_derivatives(*p.branch2(), 0.0), 0.0)
    v = c.C2 * _jets.mul(_jets.reflected_power(0.0, e), F)
    return float(_u_from_v_jet(p, v, 0.0)[0])


def quadrature_solution(p: SpecialCaseParams, c: SolutionConstants, z: float) -> float:
    """u(z) from the integral representation, by adaptive quadrature."""
    z = check_z(z)
    g, e = p.gamma, p.epsilon
    total = 0.0
    s1, s2 = QUADRATURE_SCALE
    if c.C1 != 0.0:
        if g >= 1.0:
            raise QuadratureError("t^-gamma is not integrable at 0 for gamma >= 1")
        a, b, cc = p.branch1()

        def f1(t):
            return (1.0 - t) ** e * gauss_2f1_derivatives(a, b, cc, t * t, order=0)[0]

        # algebraic weight carries the t^-gamma endpoint singularity
        val, err = quad(f1, 0.0, z, weight="alg", wvar=(-g, 0.0), epsabs=0.0, epsrel=1e-12, limit=200)
        _check_quad(val, err)
        total += s1 * c.C1 * val
    if c.C2 != 0.0:
        a, b, cc = p.branch2()

        def f2(t):
            return (1.0 - t) ** e * gauss_2f1_derivatives(a, b, cc, t * t, order=0)[0]

        val, err = quad(f2, 0.0, z, epsabs=0.0, epsrel=1e-12, limit=200)
        _check_quad(val, err)
        total += s2 * c.C2 * (-g / p.q + val)
    return total


def _check_quad(val: float, err: float) -> None:
    if not np.isfinite(val) or err > 1e-9 * max(1.0, abs(val)):
        raise QuadratureError(f"quadrature error estimate {err:.2e} too large for value {val:.6g}")


def u_at_one(p: SpecialCaseParams, c: SolutionConstants) -> float:
    """u(1) in Gamma functions and a Clausen 3F2 at unit argument.

    u(1) = C1 G(1-g/2) G(1/2+e/2) / (sqrt(pi) (1-g) G(1+e/2-g/2))
         + C2 (-g/q + 3F2(1/2, 1, (e+g)/2; 1+g/2, 3/2+e/2; 1) / (1+e))

    The 1/(1+e) factor is B(2k+1, e+1) = (2k)! G(e+1) / G(2k+e+2) from
    integrating (1-z)^e z^(2k) over [0, 1].  When g + e = -2N the 3F2 is
    balanced and terminating, and Saalschuetz's theorem sums it.
    """
    g, e = p.gamma, p.epsilon
    total = 0.0
    if c.C1 != 0.0:
        if e <= -1.0:
            raise DomainError("first-branch derivative is not integrable at z = 1 for epsilon <= -1")
        # valid for gamma > 1 too, by continuation in gamma
        total += c.C1 * math.gamma(1.0 - g / 2.0) * math.gamma(0.5 + e / 2.0) * rgamma(1.0 + e / 2.0 - g / 2.0) / (
            math.sqrt(math.pi) * (1.0 - g)
        )
    if c.C2 != 0.0:
        if e <= -1.0:
            raise DomainError("second-branch integral diverges at z = 1 for epsilon <= -1")
        if p.q == 0.0:
            raise DomainError("q = 0")
        F = clausen_3f2_unit(0.5, 1.0, (e + g) / 2.0, 1.0 + g / 2.0, 1.5 + e / 2.0)
        total += c.C2 * (-g / p.q + F / (1.0 + e))
    return total


def match_constants(target: SolutionSample, branch1: SolutionSample, branch2: SolutionSample) -> tuple[float, float]:
    """Weights (w1, w2) with target = w1 branch1 + w2 branch2 in value and slope."""
    M = np.array([[branch1.u, branch2.u], [branch1.u_prime, branch2.u_prime]])
    rhs = np.array([target.u, target.u_prime])
    w = np.linalg.solve(M, rhs)
    return float(w[0]), float(w[1])


def hypergeometric_pair_params(alpha: float, beta: float, gamma: float) -> HeunParams:
    """a = -1, q = 0, delta = epsilon with epsilon closed by the Fuchsian condition."""
    eps = (1.0 + alpha + beta - gamma) / 2.0
    return HeunParams(a=-1.0, q=0.0, alpha=alpha, beta=beta, gamma=gamma, delta=eps, epsilon=eps)


def reference_eq27(alpha: float, beta: float, gamma: float, epsilon: float, c: SolutionConstants, z: float) -> SolutionSample:
    """C1 z^(1-g) 2F1(e - alpha/2, e - beta/2; (3-g)/2; z^2) + C2 2F1(alpha/2, beta/2; (1+g)/2; z^2)."""
    z = check_z(z)
    if abs(1.0 + alpha + beta - gamma - 2.0 * epsilon) > 1e-12 * max(1.0, abs(alpha), abs(beta), abs(gamma)):
        raise ConstraintError("Fuchsian condition requires 1 + alpha + beta = gamma + 2 epsilon")
    x = z * z
    out = np.zeros(_jets.ORDER + 1)
    if c.C1 != 0.0:
        F = _jets.compose_square(
            gauss_2f1_derivatives(epsilon - alpha / 2.0, epsilon - beta / 2.0, (3.0 - gamma) / 2.0, x), z
        )
        out += c.C1 * _jets.mul(_jets.power(z, 1.0 - gamma), F)
    if c.C2 != 0.0:
        out += c.C2 * _jets.compose_square(gauss_2f1_derivatives(alpha / 2.0, beta / 2.0, (1.0 + gamma) / 2.0, x), z)
    return SolutionSample(z, float(out[0]), float(out[1]), float(out[2]))
