"""Command-line front end.

Exit codes: 0 success, 1 failed identity, 2 invalid input, 3 solver failure.
Output is written only after the whole result is computed, so a nonzero exit
never leaves partial output behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .berger import (
    CONVENTIONS,
    DEFAULT_EPS,
    BergerCurve,
    TrackingError,
    build_formula,
    fd_sweep,
)
from .dirac import (
    DEFAULT_CLUSTER_TOL,
    MAX_CHARPOLY_DEGREE,
    BergerParams,
    SolverError,
    block_charpoly,
    full_spectrum,
    nu_value,
)
from .perturb import NON_SHEAR_MESSAGE, eigen_coefficients, load_tensor
from .polyfield import PolynomialSyntaxError
from .tensor import AsymmetricTensorError, PerturbationFileError
from .verify import DEFAULT_SEED, charpoly_suite, identity_suite

EXIT_OK, EXIT_IDENTITY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(ValueError):
    pass


class IdentityFailure(RuntimeError):
    def __init__(self, message: str, payload: str):
        super().__init__(message)
        self.payload = payload


def rational(x) -> dict:
    x = Fraction(x)
    return {"exact": str(x), "decimal": float(x)}


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _param_list(params: BergerParams):
    return [rational(v) if isinstance(v, Fraction) else {"decimal": v} for v in params.values]


def _parse_params(text: str) -> BergerParams:
    try:
        return BergerParams.parse(text)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None


def _parse_eps(text: str | None) -> list[Fraction]:
    if text is None:
        return list(DEFAULT_EPS)
    vals = []
    for part in text.split(","):
        part = part.strip()
        try:
            vals.append(Fraction(part))
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a number in --eps: {part!r}") from None
    if all(v > 0 for v in vals):
        vals = vals + [-v for v in vals]
    return sorted(set(vals))


# ---------------------------------------------------------------------------
# commands; each returns (exit code, text)


def run_spectrum(args) -> tuple[int, str]:
    params = _parse_params(args.a)
    if args.n_max < 0:
        raise InputError("--n-max must be non-negative")
    spec = full_spectrum(params, args.n_max, args.cluster_tol)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eigenvalue", "multiplicity", "degree"])
        for row in spec.to_json():
            w.writerow([row["eigenvalue"], row["multiplicity"], row["degree"]])
        return EXIT_OK, buf.getvalue()
    nu = nu_value(params)
    payload = {
        "params": _param_list(params),
        "nu": rational(nu) if isinstance(nu, Fraction) else {"decimal": nu},
        "n_max": args.n_max,
        "cluster_tol": args.cluster_tol,
        "certified_radius": spec.certified_radius,
        "spectrum": spec.to_json(),
    }
    return EXIT_OK, _dumps(payload)


def _poly_coeffs(poly) -> list[str]:
    return [str(c) for c in poly.all_coeffs()]


def run_charpoly(args) -> tuple[int, str]:
    params = _parse_params(args.a)
    if not params.is_exact:
        raise InputError("charpoly needs rational parameters")
    degrees = _degrees(args.degree)
    results = []
    for n in degrees:
        oracle = block_charpoly(params, n)
        formula = build_formula(n, args.convention).evaluate(params)
        results.append({
            "degree": n,
            "convention": args.convention,
            "pair_sum": "ordered",
            "oracle": {"coefficients": _poly_coeffs(oracle), "factored": str(oracle.as_expr().factor())},
            "formula": {"coefficients": _poly_coeffs(formula)},
            "agree": oracle == formula,
        })
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "convention", "agree", "oracle_factored"])
        for r in results:
            w.writerow([r["degree"], r["convention"], r["agree"], r["oracle"]["factored"]])
        return EXIT_OK, buf.getvalue()
    return EXIT_OK, _dumps({"params": _param_list(params), "results": results})


def _degrees(value) -> list[int]:
    if value is None:
        return list(range(MAX_CHARPOLY_DEGREE + 1))
    if not 0 <= value <= MAX_CHARPOLY_DEGREE:
        raise InputError(f"closed formulas exist only for degrees 0..{MAX_CHARPOLY_DEGREE}, got {value}")
    return [value]


def run_verify(args) -> tuple[int, str]:
    degrees = _degrees(args.degree)
    reports = []
    if args.suite in ("identities", "all"):
        reports.append(identity_suite(args.seed))
    if args.suite in ("charpoly", "all"):
        reports.append(charpoly_suite(args.convention, degrees, args.seed))
    payload = {"seed": args.seed, "convention": args.convention, "suites": []}
    for r in reports:
        block = r.to_json()
        if r.charpoly:
            verdicts = {c["verdict"] for c in r.charpoly}
            block["verdict"] = "fail" if "fail" in verdicts else (
                "disagreement-reported" if "disagreement-reported" in verdicts else "agree")
        payload["suites"].append(block)
    text = _dumps(payload)
    failures = [c.name for r in reports for c in r.failures]
    if failures:
        raise IdentityFailure(f"failed identities: {', '.join(failures)}", text)
    return EXIT_OK, text


def run_perturb(args) -> tuple[int, str]:
    if not args.h_file:
        raise InputError("perturb needs --h-file")
    h = load_tensor(args.h_file)
    co = eigen_coefficients(h)
    payload = {
        "frame": h.sign.value,
        "shear": co.has_second_order,
        "lambda1": {"plus": rational(co.lambda1_plus), "minus": rational(co.lambda1_minus)},
    }
    if co.has_second_order:
        payload["lambda2"] = {"plus": rational(co.lambda2_plus), "minus": rational(co.lambda2_minus)}
    else:
        payload["lambda2"] = {"unavailable": NON_SHEAR_MESSAGE}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "lambda_plus", "lambda_minus"])
        w.writerow([1, float(co.lambda1_plus), float(co.lambda1_minus)])
        if co.has_second_order:
            w.writerow([2, float(co.lambda2_plus), float(co.lambda2_minus)])
        return EXIT_OK, buf.getvalue()
    return EXIT_OK, _dumps(payload)


def run_sweep(args) -> tuple[int, str]:
    if not args.curve:
        raise InputError("sweep needs --curve")
    try:
        curve = BergerCurve.from_expressions(args.curve)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    eps = _parse_eps(args.eps)
    for e in eps:
        if not all(v > 0 for v in curve.params_at(e).values):
            raise InputError(f"curve leaves positive parameters at eps={e}")
    report = fd_sweep(curve, eps, args.n_max, args.cluster_tol)
    if report.tracking_errors:
        raise TrackingError("; ".join(report.tracking_errors))
    verdict = report.verdict()
    if args.format == "csv":
        text = report.to_csv()
        # verdict block goes to the error stream so the CSV stays tabular
        sys.stderr.write(json.dumps({"verdict": verdict}, sort_keys=True) + "\n")
    else:
        text = _dumps(report.to_json())
    if verdict["status"] != "pass":
        raise IdentityFailure("finite-difference fit disagrees with the analytic expansion", text)
    return EXIT_OK, text


COMMANDS = {
    "spectrum": run_spectrum,
    "charpoly": run_charpoly,
    "verify": run_verify,
    "perturb": run_perturb,
    "sweep": run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s3dirac", description="Dirac spectra on generalized Berger spheres")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
        p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("spectrum", help="merged spectrum of the blocks of degree <= n-max")
    p.add_argument("--a", required=True, help="parameters a1,a2,a3")
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--cluster-tol", type=float, default=DEFAULT_CLUSTER_TOL)
    common(p)

    p = sub.add_parser("charpoly", help="compare exact characteristic polynomials with the closed formulas")
    p.add_argument("--a", default="1,1,1")
    p.add_argument("--degree", type=int)
    p.add_argument("--convention", choices=CONVENTIONS, default="printed")
    common(p)

    p = sub.add_parser("verify", help="run the exact identity suites")
    p.add_argument("--suite", choices=("identities", "charpoly", "all"), default="all")
    p.add_argument("--convention", choices=CONVENTIONS, default="printed")
    p.add_argument("--degree", type=int, help="restrict the charpoly suite to one degree")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p)

    p = sub.add_parser("perturb", help="eigenvalue coefficients for a perturbation file")
    p.add_argument("--h-file", required=True)
    common(p)

    p = sub.add_parser("sweep", help="finite-difference check along a Berger curve")
    p.add_argument("--curve", required=True, help='three expressions in eps, e.g. "1+eps,1-eps,1/(1-eps^2)"')
    p.add_argument("--eps", help="comma list; positive-only lists are mirrored (use --eps=... for negatives)")
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--cluster-tol", type=float, default=DEFAULT_CLUSTER_TOL)
    common(p, fmt_default="csv")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "cluster_tol", 1.0) <= 0:
        print("error: --cluster-tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        code, text = COMMANDS[args.command](args)
    except IdentityFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.stderr.write(exc.payload)
        return EXIT_IDENTITY
    except (SolverError, TrackingError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, PerturbationFileError, AsymmetricTensorError, PolynomialSyntaxError,
            ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":
    sys.exit(main())
