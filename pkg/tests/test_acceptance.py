"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (collected in the terminal summary) and
then asserts.  Tolerances are pinned as module constants.
"""

import numpy as np
import pytest

from heunbeta import termination
from heunbeta.errors import CertificationError, HeunError
from heunbeta.heun import integrate_grid, make_expansion_params, residual
from heunbeta.series import (
    ExpansionBasis,
    TruncationReason,
    compute_coefficients,
    evaluate,
    evaluate_grid,
    recurrence_coeffs,
)
from heunbeta.special import (
    QUADRATURE_SCALE,
    SolutionConstants,
    SpecialCaseParams,
    hypergeometric_pair_params,
    quadrature_solution,
    reference_eq27,
    solution_from_v,
    special_coefficients,
    u_at_one,
    u_at_zero,
)
from heunbeta.specfun import (
    beta_contiguous_down,
    beta_contiguous_up,
    clausen_3f2_unit,
    incomplete_beta,
    saalschutz_3f2,
    terminating_3f2_unit,
)
from heunbeta.termination import (
    Case,
    eigen_roots,
    finite_sum_solution,
    fold_base_beta,
    polynomial_roots,
    reduce_to_elementary,
    spectrum,
)

from .conftest import GRID

pytestmark = pytest.mark.acceptance

CONTIGUOUS_RTOL = 1e-10
DERIVATIVE_RTOL = 1e-10
RESIDUAL_TOL = 1e-8
RK_RTOL = 1e-6
CERT_TOL = 1e-10
ELEMENTARY_C_RTOL = 1e-9
Q_ZERO_TOL = 1e-13
SPECIAL_COEFF_RTOL = 1e-12
U0_RTOL = 1e-12
QUADRATURE_RTOL = 1e-7
U1_RTOL = 1e-4
U1_PROBE = 1 - 1e-5
SAALSCHUTZ_RTOL = 1e-10
EQ27_RK_RTOL = 1e-7
ROOT_AGREEMENT = 1e-9

SEED = 20141015


def _away_from(x, points, gap):
    return min(abs(x - k) for k in points) > gap


def _rel_dev(u, ref):
    return abs(u - ref) / max(abs(ref), 1e-300)


# -- shared termination suites (criteria 4, 5, 6, 9) ---------------------------


def _epsilon_sets():
    rng = np.random.default_rng(SEED + 4)
    out = []
    for N in range(1, 7):
        for _ in range(10):
            a = rng.choice([-1.0, 1.0]) * rng.uniform(1.2, 4.0)
            g = rng.uniform(-0.9, 0.9)
            while not _away_from(g, [0.0], 0.05):
                g = rng.uniform(-0.9, 0.9)
            d = rng.uniform(-0.9, 0.9)
            out.append((N, make_expansion_params(a, 0.0, g, d, -float(N))))
    return out


def _gamma_delta_sets():
    rng = np.random.default_rng(SEED + 5)
    out = []
    for N in range(1, 7):
        for _ in range(10):
            a = rng.choice([-1.0, 1.0]) * rng.uniform(1.2, 4.0)
            g = rng.uniform(-0.9, 0.9)
            while not _away_from(g, [0.0], 0.05):
                g = rng.uniform(-0.9, 0.9)
            e = rng.uniform(-1.5, 2.0)
            out.append((N, make_expansion_params(a, 0.0, g, 2.0 + N - g, e)))
    return out


def _run_termination_suite(sets, case):
    """Spectrum, certificates and finite-sum residuals for every set.

    Returns per-set records; failures are kept, never dropped.
    """
    records = []
    for N, p in sets:
        rec = {"N": N, "params": p, "error": None, "solutions": []}
        try:
            s = spectrum(p, N, case, cert_tol=CERT_TOL)
        except HeunError as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
            records.append(rec)
            continue
        rec["spectrum"] = s
        for q, cert in zip(s.q_values, s.certificates):
            pq = p.with_q(q)
            coeffs = finite_sum_solution(pq, N, cert_tol=CERT_TOL)
            res = max(abs(residual(pq, evaluate(pq, coeffs, z))) for z in GRID)
            rec["solutions"].append({"q": q, "cert": cert, "coeffs": coeffs, "residual": res})
        records.append(rec)
    return records


@pytest.fixture(scope="module")
def epsilon_suite():
    return _run_termination_suite(_epsilon_sets(), Case.epsilon)


@pytest.fixture(scope="module")
def gamma_delta_suite():
    return _run_termination_suite(_gamma_delta_sets(), Case.gamma_delta)


# -- criterion 1 ---------------------------------------------------------------


def test_c01_contiguous_relations(acceptance):
    rng = np.random.default_rng(SEED + 1)
    worst_up = worst_down = 0.0
    n = 0
    while n < 1000:
        p, q, z = rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.05, 0.95)
        if not _away_from(p, range(-4, 2), 1e-2) or abs(p + q - 1) < 1e-2:
            continue
        n += 1
        lo, mid, hi = incomplete_beta(p - 1, q, z), incomplete_beta(p, q, z), incomplete_beta(p + 1, q, z)
        # up-shift: p B(p) = z^p (1-z)^q + (p+q) B(p+1)
        terms = (p * mid, z**p * (1 - z) ** q, (p + q) * hi)
        worst_up = max(worst_up, abs(terms[0] - terms[1] - terms[2]) / max(map(abs, terms)))
        # down-shift: (p+q-1) B(p) = (p-1) B(p-1) - z^(p-1) (1-z)^q
        terms = ((p + q - 1) * mid, (p - 1) * lo, z ** (p - 1) * (1 - z) ** q)
        worst_down = max(worst_down, abs(terms[0] - terms[1] + terms[2]) / max(map(abs, terms)))
        # the library helpers rebuild B(p) from each neighbour
        for rebuilt in (beta_contiguous_up(p, q, z), beta_contiguous_down(p, q, z)):
            scale = max(abs(mid), abs(z ** (p - 1) * (1 - z) ** q / (p + q - 1)), abs(z**p * (1 - z) ** q / p))
            worst_up = max(worst_up, abs(rebuilt - mid) / scale)
    ok = worst_up < CONTIGUOUS_RTOL and worst_down < CONTIGUOUS_RTOL
    acceptance("C1 contiguous relations, 1000 samples", ok, f"up {worst_up:.2e}, down {worst_down:.2e}, tol {CONTIGUOUS_RTOL:g}")
    assert ok


# -- criterion 2 ---------------------------------------------------------------


def test_c02_derivative_relations(acceptance):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(5):
        g = rng.uniform(-0.9, 1.9)
        while not _away_from(g, [0.0, 1.0], 0.05):
            g = rng.uniform(-0.9, 1.9)
        d = rng.uniform(-0.9, 0.9)
        basis = ExpansionBasis(g, d)
        for n in range(11):
            gn, dn = basis.first_parameter(n), basis.delta_shared
            for z in rng.uniform(0.05, 0.95, 20):
                up = basis.member_derivative(n, z)
                prev = incomplete_beta(gn - 1, dn, z)
                cur = basis.member(n, z)
                nxt = basis.member(n + 1, z)
                # (1-z) u_n' = (g_n - 1) u_{n-1} - (g_n - 1 + d_n) u_n
                t6 = ((1 - z) * up, (gn - 1) * prev, (gn - 1 + dn) * cur)
                # z (1-z) u_n' = g_n u_n - (g_n + d_n) u_{n+1}
                t7 = (z * (1 - z) * up, gn * cur, (gn + dn) * nxt)
                for t in (t6, t7):
                    worst = max(worst, abs(t[0] - t[1] + t[2]) / max(map(abs, t)))
    ok = worst < DERIVATIVE_RTOL
    acceptance("C2 derivative relations, n=0..10 x 20 z", ok, f"worst {worst:.2e}, tol {DERIVATIVE_RTOL:g}")
    assert ok


# -- criterion 3 ---------------------------------------------------------------


def _series_sets(count):
    rng = np.random.default_rng(SEED + 3)
    out = []
    while len(out) < count:
        a = rng.choice([-1.0, 1.0]) * rng.uniform(1.2, 4.0)
        g = rng.uniform(-0.9, 1.9)
        d = rng.uniform(-0.9, 0.9)
        e = rng.uniform(-1.5, 1.5)
        q = rng.uniform(-2.0, 2.0)
        if not _away_from(g, [0.0, 1.0], 0.05):
            continue
        out.append(make_expansion_params(a, q, g, d, e))
    return out


def test_c03_series_validity(acceptance):
    worst_res = worst_rk = 0.0
    failures = []
    for i, p in enumerate(_series_sets(50)):
        try:
            coeffs, samples = evaluate_grid(p, GRID)
        except HeunError as exc:
            failures.append(f"set {i}: {type(exc).__name__}")
            continue
        if coeffs.truncation_reason is TruncationReason.cap_reached:
            failures.append(f"set {i}: coefficient cap reached")
            continue
        res = max(abs(residual(p, s)) for s in samples)
        mid = samples[4]
        rk = integrate_grid(p, mid.z, mid.u, mid.u_prime, GRID)
        dev = max(_rel_dev(r.u, s.u) for r, s in zip(rk, samples))
        worst_res, worst_rk = max(worst_res, res), max(worst_rk, dev)
        if not (res < RESIDUAL_TOL and dev < RK_RTOL):
            failures.append(f"set {i}: residual {res:.2e}, rk {dev:.2e}")
    ok = not failures
    acceptance(
        "C3 series validity, 50 sets",
        ok,
        f"residual {worst_res:.2e} (tol {RESIDUAL_TOL:g}), rk {worst_rk:.2e} (tol {RK_RTOL:g})"
        + (f"; {failures}" if failures else ""),
    )
    assert ok


# -- criteria 4, 5 -------------------------------------------------------------


def _contains_zero(s):
    scale = max([1.0] + [abs(q) for q in s.q_values])
    return any(abs(q) <= 1e-9 * scale for q in s.q_values)


def test_c04_epsilon_termination(acceptance, epsilon_suite):
    failures = []
    worst_cert = worst_res = 0.0
    n_complex = 0
    for i, rec in enumerate(epsilon_suite):
        if rec["error"]:
            failures.append(f"set {i} (N={rec['N']}): {rec['error']}")
            continue
        s = rec["spectrum"]
        n_complex += len(s.complex_roots)
        if not _contains_zero(s):
            failures.append(f"set {i}: q=0 missing")
        if s.count != rec["N"] + 1:
            failures.append(f"set {i}: {s.count} roots for N={rec['N']}")
        for sol in rec["solutions"]:
            worst_cert = max(worst_cert, *sol["cert"])
            worst_res = max(worst_res, sol["residual"])
            if not (max(sol["cert"]) < CERT_TOL and sol["residual"] < RESIDUAL_TOL):
                failures.append(f"set {i} q={sol['q']:.6g}: cert {max(sol['cert']):.2e}, residual {sol['residual']:.2e}")
    ok = not failures and len(epsilon_suite) == 60
    acceptance(
        "C4 epsilon-case termination, N=1..6 x 10",
        ok,
        f"cert {worst_cert:.2e} (tol {CERT_TOL:g}), residual {worst_res:.2e} (tol {RESIDUAL_TOL:g}), "
        f"complex roots reported {n_complex}" + (f"; {failures}" if failures else ""),
    )
    assert ok


def test_c05_gamma_delta_termination(acceptance, gamma_delta_suite):
    failures = []
    worst_cert = worst_res = 0.0
    n_complex = n_degenerate = n_real_simple = 0
    for i, rec in enumerate(gamma_delta_suite):
        if rec["error"]:
            failures.append(f"set {i} (N={rec['N']}): {rec['error']}")
            continue
        s = rec["spectrum"]
        N = rec["N"]
        if s.count != N + 1:
            failures.append(f"set {i}: {s.count} roots for N={N}")
        if s.complex_roots or s.degenerate:
            n_complex += bool(s.complex_roots)
            n_degenerate += bool(s.degenerate)
        else:
            n_real_simple += 1
            if len(s.nonzero_real) != N + 1:
                failures.append(f"set {i}: {len(s.nonzero_real)} nonzero roots for N={N}")
        for sol in rec["solutions"]:
            worst_cert = max(worst_cert, *sol["cert"])
            worst_res = max(worst_res, sol["residual"])
            if not (max(sol["cert"]) < CERT_TOL and sol["residual"] < RESIDUAL_TOL):
                failures.append(f"set {i} q={sol['q']:.6g}: cert {max(sol['cert']):.2e}, residual {sol['residual']:.2e}")
    ok = not failures and len(gamma_delta_suite) == 60
    acceptance(
        "C5 gamma+delta-case termination, N=1..6 x 10",
        ok,
        f"cert {worst_cert:.2e}, residual {worst_res:.2e}; real/simple {n_real_simple}, "
        f"with complex {n_complex}, degenerate {n_degenerate}" + (f"; {failures}" if failures else ""),
    )
    assert ok


# -- criterion 6 ---------------------------------------------------------------


def test_c06_elementary_form(acceptance, epsilon_suite, gamma_delta_suite):
    """Every certified terminated solution reduces to a bare quasi-polynomial.

    C is the base-Beta coefficient after the full reduction: the up-shift
    ladder, then folding B_z(b, s) itself into elementary terms when b + s is
    a non-positive integer.  Items are tallied by case and by root type.
    """
    tallies = {}
    failed_items = []
    for label, suite in (("epsilon", epsilon_suite), ("gamma_delta", gamma_delta_suite)):
        for rec in suite:
            for sol in rec.get("solutions", []):
                p = rec["params"].with_q(sol["q"])
                coeffs = sol["coeffs"]
                ladder = reduce_to_elementary(coeffs, p)
                form = fold_base_beta(ladder)
                c_rel = abs(form.base_coeff) / coeffs.max_abs
                res = max(abs(residual(p, form.bare_sample(z))) for z in GRID)
                kind = "q=0" if abs(sol["q"]) <= 1e-9 * max(1.0, max(map(abs, rec["spectrum"].q_values))) else "q!=0"
                key = f"{label}/{kind}"
                t = tallies.setdefault(key, {"pass": 0, "fail": 0, "max_C": 0.0, "max_ladder_C": 0.0, "max_res": 0.0})
                passed = c_rel < ELEMENTARY_C_RTOL and res < RESIDUAL_TOL
                t["pass" if passed else "fail"] += 1
                if not passed:
                    failed_items.append(f"{key} N={rec['N']} a={p.a:.4g} q={sol['q']:.6g}: |C| {c_rel:.2e}, residual {res:.2e}")
                t["max_C"] = max(t["max_C"], c_rel)
                t["max_ladder_C"] = max(t["max_ladder_C"], abs(ladder.base_coeff) / coeffs.max_abs)
                t["max_res"] = max(t["max_res"], res)
    for key, t in sorted(tallies.items()):
        acceptance(
            f"C6   item group {key}",
            t["fail"] == 0,
            f"{t['pass']} pass, {t['fail']} fail, max |C|/max|a| {t['max_C']:.2e} "
            f"(before folding {t['max_ladder_C']:.2e}), max bare residual {t['max_res']:.2e}",
        )
    ok = all(t["fail"] == 0 for t in tallies.values()) and tallies
    acceptance(
        "C6 elementary form of terminated solutions",
        bool(ok),
        f"tol |C| {ELEMENTARY_C_RTOL:g} max|a|, residual {RESIDUAL_TOL:g}",
    )
    assert ok, "items failing the elementary-form check:\n" + "\n".join(failed_items)


# -- criterion 7 ---------------------------------------------------------------


def _special_sets():
    rng = np.random.default_rng(SEED + 7)
    out = []
    while len(out) < 10:
        g = rng.uniform(-0.9, 1.9)
        e = rng.uniform(0.0, 2.0)
        if _away_from(g, [0.0, 1.0], 0.05):
            out.append(SpecialCaseParams(g, e))
    return out


def test_c07_special_case(acceptance):
    sets = _special_sets()
    checks = {}

    worst = 0.0
    for p in sets:
        h = p.heun()
        for n in range(51):
            t = (h.a * n * (n + 1 - h.gamma - h.delta), (n + h.epsilon) * (n + 1 - h.gamma), h.q)
            worst = max(worst, abs(recurrence_coeffs(h, n)[1]) / max(1.0, *map(abs, t)))
    checks["Q_n = 0, n <= 50"] = (worst < Q_ZERO_TOL, f"{worst:.2e}")

    worst = 0.0
    for p in sets:
        gen = compute_coefficients(p.heun(), n_max=40).values
        closed = special_coefficients(p, 20).values
        for k in range(21):
            if closed[2 * k] != 0.0:
                worst = max(worst, _rel_dev(gen[2 * k], closed[2 * k]))
            worst = max(worst, abs(gen[2 * k + 1]) if 2 * k + 1 < len(gen) else 0.0)
    checks["even coefficients, k <= 20"] = (worst < SPECIAL_COEFF_RTOL, f"{worst:.2e}")

    worst = 0.0
    for p in sets:
        for c in (SolutionConstants(1.0, 0.0), SolutionConstants(0.0, 1.0)):
            worst = max(worst, max(abs(residual(p.heun(), solution_from_v(p, c, z))) for z in GRID))
    checks["both branches residual"] = (worst < RESIDUAL_TOL, f"{worst:.2e}")

    worst = 0.0
    for p in sets:
        if p.gamma < 1.0:
            c = SolutionConstants(0.7, 1.3)
        else:
            c = SolutionConstants(0.0, 1.3)
        worst = max(worst, _rel_dev(u_at_zero(p, c), -c.C2 * p.gamma / p.q))
    checks["u(0) = -C2 gamma / q"] = (worst < U0_RTOL, f"{worst:.2e}")

    worst = 0.0
    for p in sets:
        if p.gamma >= 1.0:
            continue
        c = SolutionConstants(0.7 / QUADRATURE_SCALE[0], 1.3 / QUADRATURE_SCALE[1])
        for z in GRID:
            worst = max(worst, _rel_dev(quadrature_solution(p, c, z), solution_from_v(p, c, z).u))
    checks["quadrature form vs closed form"] = (worst < QUADRATURE_RTOL, f"{worst:.2e}")

    worst = 0.0
    for p in sets:
        c = SolutionConstants(0.7, 1.3)
        worst = max(worst, _rel_dev(solution_from_v(p, c, U1_PROBE).u, u_at_one(p, c)))
    checks["u(1) vs limit at 1-1e-5"] = (worst < U1_RTOL, f"{worst:.2e}")

    worst = 0.0
    for N in (1, 2, 3):
        for g in (0.3, 0.65, 1.4):
            e = -2.0 * N - g
            args = (0.5, 1.0, (e + g) / 2, 1 + g / 2, 1.5 + e / 2)
            finite = terminating_3f2_unit(*args)
            worst = max(worst, _rel_dev(saalschutz_3f2(*args), finite), _rel_dev(clausen_3f2_unit(*args), finite))
    checks["Saalschutz branch, N=1..3"] = (worst < SAALSCHUTZ_RTOL, f"{worst:.2e}")

    for name, (passed, detail) in checks.items():
        acceptance(f"C7   {name}", passed, detail)
    ok = all(v[0] for v in checks.values())
    acceptance("C7 special two-term case", ok)
    assert ok


# -- criterion 8 ---------------------------------------------------------------


def test_c08_hypergeometric_oracle(acceptance):
    rng = np.random.default_rng(SEED + 8)
    worst_res = worst_rk = 0.0
    count = 0
    while count < 10:
        alpha, beta, gamma = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-0.9, 1.9)
        if not _away_from(gamma, [-1.0, 1.0, 3.0], 0.05):
            continue
        count += 1
        p = hypergeometric_pair_params(alpha, beta, gamma)
        for c in (SolutionConstants(1.0, 0.0), SolutionConstants(0.0, 1.0)):
            ref = [reference_eq27(alpha, beta, gamma, p.epsilon, c, z) for z in GRID]
            worst_res = max(worst_res, max(abs(residual(p, s)) for s in ref))
            mid = ref[4]
            rk = integrate_grid(p, mid.z, mid.u, mid.u_prime, GRID)
            worst_rk = max(worst_rk, max(_rel_dev(r.u, s.u) for r, s in zip(rk, ref)))
    ok = worst_res < RESIDUAL_TOL and worst_rk < EQ27_RK_RTOL
    acceptance(
        "C8 hypergeometric oracle, 10 sets x 2 branches",
        ok,
        f"residual {worst_res:.2e} (tol {RESIDUAL_TOL:g}), rk {worst_rk:.2e} (tol {EQ27_RK_RTOL:g})",
    )
    assert ok


# -- criterion 9 ---------------------------------------------------------------


def _independent_agreement(p, N):
    """Largest matched gap between eigenvalue and companion roots, computed afresh."""
    e = eigen_roots(p, N).astype(complex)
    r = polynomial_roots(p, N)
    if len(e) != len(r):
        return float("inf")
    return termination._match(e, r)


def test_c09_root_method_agreement(acceptance, epsilon_suite, gamma_delta_suite):
    worst = 0.0
    for suite in (epsilon_suite, gamma_delta_suite):
        for rec in suite:
            worst = max(worst, _independent_agreement(rec["params"], rec["N"]))
    ok = worst < ROOT_AGREEMENT
    acceptance("C9 eigenvalue vs companion roots, 120 spectra", ok, f"worst {worst:.2e}, tol {ROOT_AGREEMENT:g}")
    assert ok


# -- criterion 10 --------------------------------------------------------------


def test_c10_failures_are_visible(acceptance, monkeypatch):
    checks = {}
    p = make_expansion_params(-2.5, 0.0, 0.4, 0.3, -3.0)
    s = spectrum(p, 3, Case.epsilon)

    # perturbed q: each root is refused on its own
    refused = 0
    for q in s.q_values:
        try:
            finite_sum_solution(p.with_q(q + 1e-6 * max(1.0, abs(q))), 3)
        except CertificationError as exc:
            refused += f"q={q + 1e-6 * max(1.0, abs(q))!r}" in str(exc)
    checks["perturbed q refused individually"] = refused == len(s.q_values)

    # every root that misses an (impossibly strict) certificate is named
    try:
        spectrum(p, 3, Case.epsilon, cert_tol=-1.0)
        named = 0
    except CertificationError as exc:
        named = str(exc).count("q=")
    checks["each failing certificate listed"] = named == len(s.q_values)

    # a dropped root is caught by the independent method, not clamped away
    real_eig = termination.eigen_roots
    monkeypatch.setattr(termination, "eigen_roots", lambda params, N: real_eig(params, N)[:-1])
    try:
        spectrum(p, 3, Case.epsilon)
        checks["dropped root detected"] = False
    except CertificationError:
        checks["dropped root detected"] = True
    monkeypatch.undo()

    # a shifted root is caught the same way
    monkeypatch.setattr(termination, "eigen_roots", lambda params, N: real_eig(params, N) + 1e-6)
    try:
        spectrum(p, 3, Case.epsilon)
        checks["shifted root detected"] = False
    except CertificationError:
        checks["shifted root detected"] = True
    monkeypatch.undo()

    for name, passed in checks.items():
        acceptance(f"C10  {name}", passed)
    ok = all(checks.values())
    acceptance("C10 failure visibility under fault injection", ok)
    assert ok
