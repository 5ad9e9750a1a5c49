"""Command-line front end.

Every subcommand emits one report (JSON by default, CSV for grids).  Exit
codes: 0 success, 2 invalid input, 3 numerical failure (convergence,
certification, non-finite output or a failed verification).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import HeunError
from .heun import HeunParams, integrate_grid, make_expansion_params, residual
from .series import (
    SERIES_RTOL,
    ExpansionCoefficients,
    TruncationReason,
    compute_coefficients,
    evaluate,
)
from .special import SolutionConstants, SpecialCaseParams, solution_from_v, u_at_one, u_at_zero
from .specfun import GUARD, clausen_3f2_unit, gauss_2f1, incomplete_beta
from .termination import CERT_TOL, Case, finite_sum_solution, fold_base_beta, reduce_to_elementary, spectrum

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("heunbeta")


class InvalidInput(Exception):
    pass


# -- argument parsing ---------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser, grid: bool = True) -> None:
    if grid:
        p.add_argument("--z-start", type=float, default=0.1)
        p.add_argument("--z-stop", type=float, default=0.9)
        p.add_argument("--z-count", type=int, default=9)
    p.add_argument("--tol-residual", type=float, default=1e-8, help="residual gate (default 1e-8)")
    p.add_argument("--tol-series", type=float, default=SERIES_RTOL, help="series stopping tolerance (default 1e-14)")
    p.add_argument("--tol-cert", type=float, default=CERT_TOL, help="termination certificate (default 1e-10)")
    p.add_argument("--tol-rk", type=float, default=1e-6, help="series vs integrator gate (default 1e-6)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None, help="write report here instead of stdout")


def _add_heun(p: argparse.ArgumentParser, q: bool = True) -> None:
    p.add_argument("--a", type=float, required=True)
    if q:
        p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heunbeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("eval", help="evaluate the Beta-function series on a grid")
    _add_heun(p)
    p.add_argument("--n-max", type=int, default=3000)
    p.add_argument("--coeffs", type=_floats, default=None, help="comma-separated a_n overriding the recurrence")
    _add_common(p)

    p = sub.add_parser("coeffs", help="series coefficients as a JSON array")
    _add_heun(p)
    p.add_argument("--n-max", type=int, default=3000)
    p.add_argument("--z-max", type=float, default=None)
    _add_common(p, grid=False)

    p = sub.add_parser("spectrum", help="accessory parameters that terminate the series")
    _add_heun(p, q=False)
    p.add_argument("--case", choices=["epsilon", "gamma-delta", "gamma_delta"], required=True)
    p.add_argument("--N", type=int, required=True)
    _add_common(p, grid=False)

    p = sub.add_parser("special", help="closed-form solution for a=-1, delta=-epsilon, q=(gamma-1)epsilon")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=0.0)
    _add_common(p)

    p = sub.add_parser("verify", help="series residual and integrator cross-check on a grid")
    _add_heun(p)
    p.add_argument("--n-max", type=int, default=3000)
    _add_common(p)

    p = sub.add_parser("integrate", help="integrate the equation from z0 over a grid")
    _add_heun(p)
    p.add_argument("--z0", type=float, default=0.5)
    p.add_argument("--u0", type=float, required=True)
    p.add_argument("--up0", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("betainc", help="incomplete Beta function B_z(p, q)")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    _add_common(p, grid=False)

    p = sub.add_parser("hyp", help="2F1(a,b;c;x) or 3F2(a1,a2,a3;b1,b2;1)")
    p.add_argument("--upper", type=_floats, required=True)
    p.add_argument("--lower", type=_floats, required=True)
    p.add_argument("--x", type=float, default=1.0)
    _add_common(p, grid=False)
    return parser


# -- helpers ------------------------------------------------------------------


def _grid(args) -> list[float]:
    if args.z_count < 1:
        raise InvalidInput("--z-count must be >= 1")
    lo, hi = args.z_start, args.z_stop
    for z in (lo, hi):
        if not (GUARD <= z <= 1.0 - GUARD):
            raise InvalidInput(f"grid endpoint {z} outside [{GUARD}, {1 - GUARD}]")
    return np.linspace(lo, hi, args.z_count).tolist() if args.z_count > 1 else [lo]


def _heun_params(args, q: float | None = None) -> HeunParams:
    q = args.q if q is None else q
    if args.delta is None or args.epsilon is None:
        raise InvalidInput("--delta and --epsilon are required")
    if args.alpha is None and args.beta is None:
        return make_expansion_params(args.a, q, args.gamma, args.delta, args.epsilon)
    # the missing exponent at infinity is closed by the Fuchsian condition
    total = args.gamma + args.delta + args.epsilon - 1.0
    alpha = args.alpha if args.alpha is not None else total - args.beta
    beta = args.beta if args.beta is not None else total - alpha
    return HeunParams(args.a, q, alpha, beta, args.gamma, args.delta, args.epsilon)


def _tolerances(args) -> dict:
    return {
        "residual": args.tol_residual,
        "series": args.tol_series,
        "certificate": args.tol_cert,
        "rk": args.tol_rk,
    }


def _sample_row(params, s) -> dict:
    return {
        "z": s.z,
        "u": s.u,
        "u_prime": s.u_prime,
        "u_second": s.u_second,
        "residual": abs(residual(params, s)),
    }


def _all_finite(obj) -> bool:
    if isinstance(obj, float):
        return math.isfinite(obj)
    if isinstance(obj, dict):
        return all(_all_finite(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(_all_finite(v) for v in obj)
    return True


# -- subcommands --------------------------------------------------------------


def cmd_eval(args) -> dict:
    params = _heun_params(args)
    zs = _grid(args)
    if args.coeffs is not None:
        coeffs = ExpansionCoefficients(np.array(args.coeffs, dtype=float), TruncationReason.terminated)
    else:
        coeffs = compute_coefficients(params, n_max=args.n_max, z_max=max(zs), tol=args.tol_series)
    points = [_sample_row(params, evaluate(params, coeffs, z, tol=args.tol_series)) for z in zs]
    return {
        "params": params.as_dict(),
        "n_coefficients": len(coeffs),
        "truncation_reason": coeffs.truncation_reason.value,
        "points": points,
    }


def cmd_coeffs(args) -> dict:
    params = _heun_params(args)
    coeffs = compute_coefficients(params, n_max=args.n_max, z_max=args.z_max, tol=args.tol_series)
    return {
        "params": params.as_dict(),
        "truncation_reason": coeffs.truncation_reason.value,
        "normalization": "a_0 = 1",
        "coefficients": coeffs.values.tolist(),
    }


def cmd_spectrum(args) -> dict:
    case = Case.gamma_delta if args.case.replace("-", "_") == "gamma_delta" else Case.epsilon
    N = args.N
    eps, delta = args.epsilon, args.delta
    if case is Case.epsilon and eps is None:
        eps = -float(N)
    if case is Case.gamma_delta and delta is None:
        delta = N + 2.0 - args.gamma
    if eps is None or delta is None:
        raise InvalidInput("--delta (epsilon case) or --epsilon (gamma-delta case) is required")
    params = make_expansion_params(args.a, 0.0, args.gamma, delta, eps)
    sp = spectrum(params, N, case, cert_tol=args.tol_cert)
    elementary, folded = [], []
    for q in sp.q_values:
        pq = params.with_q(q)
        form = reduce_to_elementary(finite_sum_solution(pq, N, cert_tol=args.tol_cert), pq)
        elementary.append(form.base_coeff)
        folded.append(fold_base_beta(form).base_coeff)
    return {
        "case": case.value,
        "N": N,
        "params": {k: v for k, v in params.as_dict().items() if k != "q"},
        "q_values": sp.q_values,
        "complex_roots": [[c.real, c.imag] for c in sp.complex_roots],
        "certificates": [{"a_N+1": c[0], "a_N+2": c[1]} for c in sp.certificates],
        "root_agreement": sp.root_agreement,
        "degenerate_pairs": [list(p) for p in sp.degenerate],
        "elementary_C": elementary,
        "elementary_C_folded": folded,
    }


def cmd_special(args) -> dict:
    p = SpecialCaseParams(args.gamma, args.epsilon)
    c = SolutionConstants(args.c1, args.c2)
    hp = p.heun()
    points = [_sample_row(hp, solution_from_v(p, c, z)) for z in _grid(args)]
    out = {"params": hp.as_dict(), "C1": c.C1, "C2": c.C2, "points": points}
    try:
        out["u0"] = u_at_zero(p, c)
    except HeunError as exc:
        out["u0"] = None
        out["u0_note"] = str(exc)
    try:
        out["u1"] = u_at_one(p, c)
    except HeunError as exc:
        out["u1"] = None
        out["u1_note"] = str(exc)
    return out


def cmd_verify(args) -> dict:
    params = _heun_params(args)
    zs = _grid(args)
    coeffs = compute_coefficients(params, n_max=args.n_max, z_max=max(zs), tol=args.tol_series)
    samples = [evaluate(params, coeffs, z, tol=args.tol_series) for z in zs]
    z0 = zs[len(zs) // 2]
    mid = samples[len(zs) // 2]
    rk = integrate_grid(params, z0, mid.u, mid.u_prime, zs)
    floor = 1e-2 * max(abs(s.u) for s in samples)
    points = []
    for s, r in zip(samples, rk):
        row = _sample_row(params, s)
        row["u_rk"] = r.u
        row["rk_deviation"] = abs(r.u - s.u) / max(abs(s.u), floor, 1e-300)
        points.append(row)
    max_res = max(p["residual"] for p in points)
    max_dev = max(p["rk_deviation"] for p in points)
    passed = bool(max_res < args.tol_residual and max_dev < args.tol_rk)
    return {
        "params": params.as_dict(),
        "truncation_reason": coeffs.truncation_reason.value,
        "n_coefficients": len(coeffs),
        "max_residual": max_res,
        "max_rk_deviation": max_dev,
        "passed": passed,
        "points": points,
        "_exit": EXIT_OK if passed else EXIT_NUMERIC,
    }


def cmd_integrate(args) -> dict:
    params = _heun_params(args)
    samples = integrate_grid(params, args.z0, args.u0, args.up0, _grid(args))
    return {"params": params.as_dict(), "points": [_sample_row(params, s) for s in samples]}


def cmd_betainc(args) -> dict:
    return {"p": args.p, "q": args.q, "z": args.z, "value": incomplete_beta(args.p, args.q, args.z)}


def cmd_hyp(args) -> dict:
    up, lo = args.upper, args.lower
    if len(up) == 2 and len(lo) == 1:
        value = gauss_2f1(up[0], up[1], lo[0], args.x)
        kind = "2F1"
    elif len(up) == 3 and len(lo) == 2:
        if args.x != 1.0:
            raise InvalidInput("3F2 is only available at unit argument")
        value = clausen_3f2_unit(*up, *lo)
        kind = "3F2"
    else:
        raise InvalidInput("need 2 upper + 1 lower (2F1) or 3 upper + 2 lower (3F2)")
    return {"function": kind, "upper": up, "lower": lo, "x": args.x, "value": value}


COMMANDS = {
    "eval": cmd_eval,
    "coeffs": cmd_coeffs,
    "spectrum": cmd_spectrum,
    "special": cmd_special,
    "verify": cmd_verify,
    "integrate": cmd_integrate,
    "betainc": cmd_betainc,
    "hyp": cmd_hyp,
}


# -- output -------------------------------------------------------------------


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    results = report.get("results") or {}
    rows = results.get("points")
    if rows is None and "q_values" in results:
        rows = [
            {"q": q, **cert, "elementary_C": c}
            for q, cert, c in zip(results["q_values"], results["certificates"], results["elementary_C"])
        ]
    if rows is None and "coefficients" in results:
        rows = [{"n": n, "a_n": v} for n, v in enumerate(results["coefficients"])]
    if rows is None:
        rows = [{k: v for k, v in results.items() if not isinstance(v, (list, dict))}] if results else [
            {"status": report["status"], "error": report.get("error", {}).get("message", "")}
        ]
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(report: dict, fmt: str, out: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n" if fmt == "json" else _to_csv(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HEUN_LOG", "WARNING").upper(), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    echo = {k: v for k, v in vars(args).items() if k not in ("format", "out")}
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "heunbeta",
        "version": __version__,
        "command": args.subcommand,
        "inputs": echo,
        "tolerances": _tolerances(args),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    code = EXIT_OK
    try:
        results = COMMANDS[args.subcommand](args)
        code = results.pop("_exit", EXIT_OK)
        if not _all_finite(results):
            raise FloatingPointError("non-finite value in output")
        report["status"] = "ok" if code == EXIT_OK else "failed"
        report["results"] = results
    except InvalidInput as exc:
        code = EXIT_INVALID
        report["status"] = "invalid"
        report["error"] = {"type": "InvalidInput", "message": str(exc)}
    except (HeunError, FloatingPointError, ArithmeticError, ValueError) as exc:
        code = EXIT_NUMERIC
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    _emit(report, args.format, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
