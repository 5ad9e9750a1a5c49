"""Termination spectra of the Beta-function series and their closed forms.

The series stops after a_N when a_{N+1} = a_{N+2} = 0.  The second zero is
automatic once P_N = 0, which happens for

    epsilon = -N               (``Case.epsilon``)
    gamma + delta - 2 = N      (``Case.gamma_delta``)

and a_{N+1} = 0 then fixes the accessory parameter q.  Because q enters Q_n
linearly, the admissible q are the eigenvalues of the (N+1)x(N+1)
tridiagonal matrix acting on (a_0, ..., a_N).  The same roots are computed a
second way, as zeros of the polynomial a_{N+1}(q), and the two sets have to
agree.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import linear_sum_assignment

from . import _jets
from .errors import CertificationError, ConstraintError, PoleError
from .heun import HeunParams, SolutionSample, _check_point
from .series import (
    ExpansionCoefficients,
    TruncationReason,
    _check_gamma,
    _require_expandable,
    basis_values,
    recurrence_coeffs,
)
from .specfun import POLE_TOL

__all__ = [
    "Case",
    "TerminationSpectrum",
    "QuasiPolynomialForm",
    "spectrum_matrix",
    "eigen_roots",
    "polynomial_roots",
    "spectrum",
    "recurrence_tail",
    "finite_sum_solution",
    "reduce_to_elementary",
    "fold_base_beta",
]

log = logging.getLogger(__name__)

CASE_TOL = 1e-12
CERT_TOL = 1e-10
AGREE_TOL = 1e-9
REAL_TOL = 1e-9
DEGENERATE_RTOL = 1e-7


class Case(str, enum.Enum):
    epsilon = "epsilon"
    gamma_delta = "gamma_delta"


@dataclass
class TerminationSpectrum:
    case: Case
    N: int
    params: HeunParams
    q_values: list[float]
    complex_roots: list[complex]
    certificates: list[tuple[float, float]]
    polynomial_roots: list[complex]
    root_agreement: float
    degenerate: list[tuple[int, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.q_values) + len(self.complex_roots)

    @property
    def nonzero_real(self) -> list[float]:
        scale = max([1.0] + [abs(q) for q in self.q_values])
        return [q for q in self.q_values if abs(q) > REAL_TOL * scale]


@dataclass
class QuasiPolynomialForm:
    """C B_z(b, s) + z^b (1-z)^s P(z) with b = 1 - gamma, s = 1 - delta."""

    base_coeff: float
    poly: np.ndarray
    prefactor_exponents: tuple[float, float]

    def bare_sample(self, z: float) -> SolutionSample:
        """The quasi-polynomial part alone, with analytic derivatives."""
        b, s = self.prefactor_exponents
        jet = _jets.mul(_jets.mul(_jets.power(z, b), _jets.reflected_power(z, s)), _jets.polynomial(self.poly, z))
        return SolutionSample(z, jet[0], jet[1], jet[2])

    def sample(self, z: float) -> SolutionSample:
        b, s = self.prefactor_exponents
        bare = self.bare_sample(z)
        if self.base_coeff == 0.0:
            return bare
        B = basis_values(1.0 - b, 1.0 - s, z, 1)[0]
        d1 = z ** (b - 1.0) * (1.0 - z) ** (s - 1.0)
        d2 = d1 * ((b - 1.0) / z - (s - 1.0) / (1.0 - z))
        C = self.base_coeff
        return SolutionSample(z, bare.u + C * B, bare.u_prime + C * d1, bare.u_second + C * d2)

    def value(self, z: float) -> float:
        return self.sample(z).u


def check_case(params: HeunParams, N: int, case: Case) -> None:
    case = Case(case)
    if N < 1 or int(N) != N:
        raise ConstraintError(f"termination order must be a positive integer, got {N!r}")
    if case is Case.epsilon:
        if abs(params.epsilon + N) > CASE_TOL * max(1.0, N):
            raise ConstraintError(f"epsilon case needs epsilon = -{N}, got {params.epsilon}")
    else:
        if abs(params.gamma + params.delta - 2.0 - N) > CASE_TOL * max(1.0, N):
            raise ConstraintError(f"gamma_delta case needs gamma + delta - 2 = {N}")


def spectrum_matrix(params: HeunParams, N: int) -> np.ndarray:
    """Tridiagonal matrix whose eigenvalues are the q giving a_{N+1} = 0.

    Row m is R_{m+1} a_{m+1} + Q_m|_{q=0} a_m + P_{m-1} a_{m-1} = q a_m.
    """
    p0 = params.with_q(0.0)
    M = np.zeros((N + 1, N + 1))
    for m in range(N + 1):
        M[m, m] = recurrence_coeffs(p0, m)[1]
        if m + 1 <= N:
            M[m, m + 1] = recurrence_coeffs(p0, m + 1)[0]
        if m >= 1:
            M[m, m - 1] = recurrence_coeffs(p0, m - 1)[2]
    return M


def eigen_roots(params: HeunParams, N: int) -> np.ndarray:
    return np.linalg.eigvals(spectrum_matrix(params, N))


def coefficient_polynomials(params: HeunParams, upto: int) -> list[Polynomial]:
    """a_0(q), ..., a_upto(q) as polynomials in q."""
    p0 = params.with_q(0.0)
    qvar = Polynomial([0.0, 1.0])
    polys = [Polynomial([1.0])]
    for n in range(1, upto + 1):
        R = recurrence_coeffs(p0, n)[0]
        if R == 0.0:
            raise PoleError(f"R_{n} vanishes")
        Q = recurrence_coeffs(p0, n - 1)[1] - qvar
        acc = Q * polys[n - 1]
        if n >= 2:
            acc = acc + recurrence_coeffs(p0, n - 2)[2] * polys[n - 2]
        polys.append(-acc / R)
    return polys


def polynomial_roots(params: HeunParams, N: int, polish: int = 2) -> np.ndarray:
    """Companion-matrix roots of a_{N+1}(q), refined by Newton steps on the same polynomial."""
    poly = coefficient_polynomials(params, N + 1)[-1]
    roots = poly.roots().astype(complex)
    dpoly = poly.deriv()
    for _ in range(polish):
        d = dpoly(roots)
        ok = d != 0
        roots[ok] = roots[ok] - poly(roots[ok]) / d[ok]
    return roots


def recurrence_tail(params: HeunParams, N: int) -> np.ndarray:
    """a_0 .. a_{N+2} from the plain recurrence (no termination detection)."""
    vals = [1.0]
    for n in range(1, N + 3):
        R = recurrence_coeffs(params, n)[0]
        Q = recurrence_coeffs(params, n - 1)[1]
        P = recurrence_coeffs(params, n - 2)[2] if n >= 2 else 0.0
        if R == 0.0:
            raise PoleError(f"R_{n} vanishes")
        am2 = vals[n - 2] if n >= 2 else 0.0
        vals.append(-(Q * vals[n - 1] + P * am2) / R)
    return np.array(vals)


def certificate(params: HeunParams, N: int) -> tuple[float, float]:
    """(|a_{N+1}|, |a_{N+2}|) relative to max |a_0..a_N|."""
    a = recurrence_tail(params, N)
    scale = np.max(np.abs(a[: N + 1]))
    return float(abs(a[N + 1]) / scale), float(abs(a[N + 2]) / scale)


def _match(first: np.ndarray, second: np.ndarray) -> float:
    if len(first) != len(second):
        return float("inf")
    cost = np.abs(first[:, None] - second[None, :])
    rows, cols = linear_sum_assignment(cost)
    rel = cost[rows, cols] / np.maximum(1.0, np.abs(first[rows]))
    return float(rel.max()) if len(rel) else 0.0


def spectrum(params: HeunParams, N: int, case: Case | str, cert_tol: float = CERT_TOL) -> TerminationSpectrum:
    """All accessory parameters q for which the series terminates at order N.

    ``params.q`` is ignored.  Raises CertificationError when a real root fails
    its certificate or the two root methods disagree.
    """
    case = Case(case)
    _require_expandable(params)
    check_case(params, N, case)
    _check_gamma(params.gamma, N + 1)
    if params.a == 0.0:
        raise PoleError("a = 0 makes every R_n vanish")

    eig = eigen_roots(params, N).astype(complex)
    poly = polynomial_roots(params, N)
    agreement = _match(eig, poly)
    if not agreement <= AGREE_TOL:
        raise CertificationError(
            f"eigenvalue and polynomial roots disagree (max relative gap {agreement:.3e})"
        )

    scale = max(1.0, float(np.max(np.abs(eig))))
    real = sorted(float(r.real) for r in eig if abs(r.imag) <= REAL_TOL * scale)
    cplx = sorted((complex(r) for r in eig if abs(r.imag) > REAL_TOL * scale), key=lambda c: (c.real, c.imag))

    certs = []
    failures = []
    for q in real:
        c = certificate(params.with_q(q), N)
        certs.append(c)
        if not max(c) <= cert_tol:
            failures.append((q, c))
    if failures:
        detail = ", ".join(f"q={q:.12g}: |a_N+1|={c[0]:.2e}, |a_N+2|={c[1]:.2e}" for q, c in failures)
        raise CertificationError(f"{len(failures)} root(s) failed certification: {detail}")

    degenerate = []
    for i in range(len(eig)):
        for j in range(i + 1, len(eig)):
            if abs(eig[i] - eig[j]) <= DEGENERATE_RTOL * max(1.0, abs(eig[i])):
                degenerate.append((i, j))
    if degenerate:
        log.warning("possibly degenerate roots: %s", degenerate)

    return TerminationSpectrum(
        case=case,
        N=N,
        params=params,
        q_values=real,
        complex_roots=cplx,
        certificates=certs,
        polynomial_roots=sorted(poly.tolist(), key=lambda c: (c.real, c.imag)),
        root_agreement=agreement,
        degenerate=degenerate,
    )


def finite_sum_solution(params: HeunParams, N: int, cert_tol: float = CERT_TOL) -> ExpansionCoefficients:
    """Coefficients a_0..a_N of the terminated series at the given q."""
    _require_expandable(params)
    a = recurrence_tail(params, N)
    scale = np.max(np.abs(a[: N + 1]))
    c1, c2 = abs(a[N + 1]) / scale, abs(a[N + 2]) / scale
    if not max(c1, c2) <= cert_tol:
        raise CertificationError(
            f"series does not terminate at N={N} for q={params.q!r}: "
            f"|a_N+1|={c1:.3e}, |a_N+2|={c2:.3e} (relative)"
        )
    if abs(a[N]) <= POLE_TOL * scale:
        log.warning("a_N is negligible at q=%r; the termination order may be lower", params.q)
    return ExpansionCoefficients(
        a[: N + 1].copy(),
        TruncationReason.terminated,
        meta={"N": N, "certificate": (float(c1), float(c2))},
    )


def reduce_to_elementary(coeffs: ExpansionCoefficients, params: HeunParams) -> QuasiPolynomialForm:
    """Rewrite sum a_n B_z(b + n, s) as C B_z(b, s) + z^b (1-z)^s P(z).

    Climbs the ladder B(p+1) = [p B(p) - z^p (1-z)^s] / (p + s) from p = b.
    """
    b, s = 1.0 - params.gamma, 1.0 - params.delta
    a = coeffs.values
    weight = 1.0
    poly = Polynomial([0.0])
    C = a[0] if len(a) else 0.0
    P = Polynomial([0.0])
    for n in range(len(a) - 1):
        denom = b + n + s
        if abs(denom) <= POLE_TOL:
            raise PoleError(f"ladder step {n} -> {n + 1} divides by b+n+s={denom!r}")
        weight = weight * (b + n) / denom
        poly = ((b + n) * poly - Polynomial.basis(n)) / denom
        C += a[n + 1] * weight
        P = P + a[n + 1] * poly
    coef = P.coef if len(P.coef) else np.zeros(1)
    return QuasiPolynomialForm(float(C), np.array(coef, dtype=float), (b, s))


def fold_base_beta(form: QuasiPolynomialForm) -> QuasiPolynomialForm:
    """Absorb C B_z(b, s) into the polynomial when b + s = -M, M = 0, 1, 2, ...

    Then B_z(b, s) = z^b (1-z)^s sum_k binom(M, k) z^k (1-z)^(M-k) / (b + k),
    which follows from substituting w = t / (1 - t) in the defining integral.
    For other b + s the form is returned unchanged.
    """
    b, s = form.prefactor_exponents
    M = round(-(b + s))
    if M < 0 or abs(b + s + M) > POLE_TOL or form.base_coeff == 0.0:
        return form
    extra = Polynomial([0.0])
    for k in range(M + 1):
        extra = extra + comb(M, k) / (b + k) * Polynomial.basis(k) * Polynomial([1.0, -1.0]) ** (M - k)
    merged = Polynomial(form.poly) + form.base_coeff * extra
    return QuasiPolynomialForm(0.0, np.array(merged.coef, dtype=float), (b, s))


def elementary_sample(form: QuasiPolynomialForm, params: HeunParams, z: float) -> SolutionSample:
    z = _check_point(params, z)
    return form.sample(z)
