"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 malformed input file,
3 invalid parameter combination, 4 fuzz outcome differs from expectation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from qrenyi import divergences as dv
from qrenyi import verify
from qrenyi.errors import DimensionMismatch, InvalidAlpha, NotNormalized, NotPositiveSemidefinite, NumericalFailure
from qrenyi.io import FormatError, load_operator, operator_to_dict
from qrenyi.linalg import DEFAULT_RANK_TOL, DensityOperator, PsdOperator

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT, EXIT_PARAM, EXIT_FUZZ = 0, 1, 2, 3, 4

QUANTITIES = ("sandwiched", "petz", "relative", "min", "max", "zero", "hypothesis")
FUZZ_PROPERTIES = ("dpi", "joint-convexity", "lemma3", "positivity", "alt")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def format_value(v: float) -> str:
    """Fixed 12-decimal rendering, ``inf`` for +inf, never ``-0.000000000000``."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    text = f"{v:.12f}"
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def _load_pair(args):
    try:
        rho_op = load_operator(args.rho)
        sigma_op = load_operator(args.sigma)
    except FormatError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc
    if rho_op.dim != sigma_op.dim:
        raise CliError(EXIT_INPUT, f"rho is {rho_op.dim}-dimensional but sigma is {sigma_op.dim}-dimensional")
    try:
        return DensityOperator(rho_op.data), PsdOperator(sigma_op.data)
    except (NotPositiveSemidefinite, NotNormalized) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from exc


def _rank_tol(args) -> float:
    tol = DEFAULT_RANK_TOL if args.rank_tol is None else args.rank_tol
    if not 0.0 <= tol < 1.0:
        raise CliError(EXIT_PARAM, "--rank-tol must lie in [0, 1)")
    return tol


def _check_epsilon(eps):
    if eps is None:
        raise CliError(EXIT_PARAM, "--epsilon is required")
    if not 0.0 <= eps < 1.0:
        raise CliError(EXIT_PARAM, "--epsilon must lie in [0, 1)")
    return eps


def evaluate(quantity: str, rho, sigma, alpha=None, epsilon=None, rank_tol=DEFAULT_RANK_TOL) -> float:
    if quantity == "sandwiched":
        return dv.sandwiched_renyi(rho, sigma, alpha, rank_tol).value
    if quantity == "petz":
        return dv.alpha_relative_renyi(rho, sigma, alpha, rank_tol).value
    if quantity == "relative":
        return dv.relative_entropy(rho, sigma, rank_tol).value
    if quantity == "min":
        return dv.d_min(rho, sigma, rank_tol).value
    if quantity == "max":
        return dv.d_max(rho, sigma, rank_tol).value
    if quantity == "zero":
        return dv.d0(rho, sigma, rank_tol).value
    return dv.hypothesis_testing(rho, sigma, epsilon, rank_tol).value


def cmd_eval(args, out) -> int:
    rank_tol = _rank_tol(args)
    if args.quantity in ("sandwiched", "petz"):
        if args.alpha is None:
            raise CliError(EXIT_PARAM, f"--alpha is required for {args.quantity}")
        try:
            dv._check_alpha(args.alpha, allow_zero=args.quantity == "petz")
        except InvalidAlpha as exc:
            raise CliError(EXIT_PARAM, str(exc)) from exc
    if args.quantity == "hypothesis":
        _check_epsilon(args.epsilon)
    rho, sigma = _load_pair(args)
    value = evaluate(args.quantity, rho, sigma, args.alpha, args.epsilon, rank_tol)
    out.write(format_value(value) + "\n")
    return EXIT_OK


def sweep_alphas(args) -> list[float]:
    if args.alpha_list is not None:
        try:
            alphas = [float(x) for x in args.alpha_list.split(",") if x.strip()]
        except ValueError as exc:
            raise CliError(EXIT_PARAM, f"bad --alpha list: {exc}") from exc
    else:
        if args.start is None or args.stop is None:
            raise CliError(EXIT_PARAM, "give --alpha LIST or --start/--stop/--count")
        if args.count < 1:
            raise CliError(EXIT_PARAM, "--count must be >= 1")
        if args.scale == "log":
            if args.start <= 0 or args.stop <= 0:
                raise CliError(EXIT_PARAM, "log sweeps need positive endpoints")
            alphas = np.geomspace(args.start, args.stop, args.count).tolist()
        else:
            alphas = np.linspace(args.start, args.stop, args.count).tolist()
    if not alphas or any(not math.isfinite(a) or a <= 0 or a == 1.0 for a in alphas):
        raise CliError(EXIT_PARAM, "alpha values must be positive, finite and different from 1")
    return sorted(alphas)


def cmd_sweep(args, out) -> int:
    rank_tol = _rank_tol(args)
    alphas = sweep_alphas(args)
    rho, sigma = _load_pair(args)
    rows = []
    for a in alphas:
        s = dv.sandwiched_renyi(rho, sigma, a, rank_tol).value
        p = dv.alpha_relative_renyi(rho, sigma, a, rank_tol).value
        gap = p - s if math.isfinite(p) and math.isfinite(s) else (math.inf if math.isinf(p) and math.isfinite(s) else math.nan)
        rows.append((a, s, p, gap))
    if args.format == "json":
        doc = {
            "base": 2,
            "rows": [
                {"alpha": a, "sandwiched": format_value(s), "petz": format_value(p), "gap": format_value(g)}
                for a, s, p, g in rows
            ],
        }
        out.write(json.dumps(doc) + "\n")
    else:
        out.write("# base=2\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["alpha", "sandwiched", "petz", "gap"])
        for a, s, p, g in rows:
            writer.writerow([f"{a:.12g}", format_value(s), format_value(p), format_value(g)])
    return EXIT_OK


def cmd_counterexample(args, out) -> int:
    if not 0.0 < args.c < 1.0:
        raise CliError(EXIT_PARAM, "c must lie in (0, 1)")
    if not 0.0 < args.alpha_min < 1.0:
        raise CliError(EXIT_PARAM, "--alpha-min must lie in (0, 1)")
    report = verify.counterexample_report(args.c, args.alpha_min)
    out.write(report.to_json() + "\n")
    return EXIT_OK if report.ok else EXIT_FUZZ


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise CliError(EXIT_PARAM, f"bad --dims: {exc}") from exc
    if not dims or any(d < 1 or d > 16 for d in dims):
        raise CliError(EXIT_PARAM, "--dims entries must lie in [1, 16]")
    return dims


def cmd_fuzz(args, out) -> int:
    dims = _parse_dims(args.dims)
    if args.trials < 1:
        raise CliError(EXIT_PARAM, "--trials must be >= 1")
    prop = args.property
    if prop == "dpi":
        if args.alpha is None or args.alpha <= 0 or args.alpha == 1.0:
            raise CliError(EXIT_PARAM, "dpi needs --alpha > 0, != 1")
        report = verify.fuzz_dpi(args.alpha, args.trials, args.seed, dims)
        expected = report.ok if args.alpha >= 0.5 else bool(report.violations) and report.worst_margin > 1e-6
        out.write(report.to_json() + "\n")
    elif prop == "joint-convexity":
        if args.alpha is None or not 0.5 <= args.alpha < 1.0:
            raise CliError(EXIT_PARAM, "joint-convexity needs --alpha in [0.5, 1)")
        if args.mixture_size < 1:
            raise CliError(EXIT_PARAM, "--mixture-size must be >= 1")
        report = verify.fuzz_joint_convexity(args.alpha, args.trials, args.seed, args.mixture_size, dims)
        expected = report.ok
        out.write(report.to_json() + "\n")
    elif prop == "lemma3":
        report = verify.fuzz_lemma3(args.trials, args.seed, dims)
        expected = report.ok
        out.write(report.to_json() + "\n")
    elif prop == "positivity":
        report = verify.fuzz_positivity(args.trials, args.seed, dims)
        expected = report.ok
        out.write(report.to_json() + "\n")
    else:
        reports = verify.fuzz_alt(args.trials, args.seed, dims)
        expected = all(r.ok for r in reports.values())
        out.write(json.dumps({k: json.loads(r.to_json()) for k, r in reports.items()}, sort_keys=True) + "\n")
    return EXIT_OK if expected else EXIT_FUZZ


def cmd_np(args, out) -> int:
    rank_tol = _rank_tol(args)
    eps = _check_epsilon(args.epsilon)
    rho, sigma = _load_pair(args)
    test = dv.hypothesis_testing(rho, sigma, eps, rank_tol)
    doc = {
        "epsilon": test.epsilon,
        "value": format_value(test.value),
        "type1_error": test.type1_error,
        "type2_error": test.type2_error,
        "test_operator": operator_to_dict(test.test_operator),
    }
    out.write(json.dumps(doc) + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARAM, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrenyi", description="Quantum Renyi divergences and numerical checks of their alpha -> 0 limit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair_flags(p):
        p.add_argument("--rho", required=True, help="density operator JSON file")
        p.add_argument("--sigma", required=True, help="PSD operator JSON file")
        p.add_argument("--rank-tol", type=float, default=None, help="relative support threshold")

    p = sub.add_parser("eval", help="evaluate one divergence")
    pair_flags(p)
    p.add_argument("--quantity", required=True, choices=QUANTITIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="sandwiched and Petz divergences over a range of alpha")
    pair_flags(p)
    p.add_argument("--alpha", dest="alpha_list", help="comma-separated alpha values")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--scale", choices=("linear", "log"), default="log")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=None, help="accepted for uniformity; sweeps are deterministic")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("counterexample", help="2x2 pair with unequal supports where the limit fails")
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--alpha-min", type=float, default=1e-5)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("fuzz", help="randomized property checks")
    p.add_argument("--property", required=True, choices=FUZZ_PROPERTIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default="2,3")
    p.add_argument("--mixture-size", type=int, default=2)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("np", help="optimal Neyman-Pearson test")
    pair_flags(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_np)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except CliError as exc:
        print(f"qrenyi: {exc}", file=sys.stderr)
        return exc.code
    except (NumericalFailure, FloatingPointError) as exc:
        print(f"qrenyi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidAlpha, ValueError, DimensionMismatch) as exc:
        print(f"qrenyi: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
