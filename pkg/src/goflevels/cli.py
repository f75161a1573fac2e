"""Command-line interface.

Exit status is 0 on success, 1 when a computation fails and 2 on usage
errors (bad flags, unreadable or malformed input files).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from goflevels import asymptotics, calibration, fileio
from goflevels.boundary_crossing import mc_level_estimate
from goflevels.gof_tests import curve_eval, evaluate_test, hc_statistics, minp_statistics
from goflevels.local_levels import local_levels_one_sided, local_levels_two_sided

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _unit_open(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _cmd_calibrate(args) -> None:
    sided = "one" if args.sided == 1 else "two"
    if args.method == "mc":
        if args.seed is None:
            raise UsageError("--method mc needs --seed")
        result = calibration.calibrate_mc(
            args.family, args.n, args.alpha, sided, reps=args.reps, seed=args.seed, tol=args.tol
        )
    elif args.family == "ks":
        if sided != "one":
            raise UsageError("only the one-sided KS family is supported")
        result = calibration.calibrate_ks(args.n, args.alpha)
    elif args.family == "hc":
        result = calibration.calibrate_hc(args.n, args.alpha, sided)
    else:
        result = calibration.calibrate_ell(args.n, args.alpha, sided)
    sys.stdout.write(fileio.format_calibration(result))
    if args.out:
        test = result.test()
        # keep the calibrated parameter with the boundaries
        test = type(test)(test.n, test.lower, test.upper, result.family, result.parameter)
        fileio.write_testdef(test, args.out)


def _cmd_local_levels(args) -> None:
    test = fileio.read_testdef(args.from_)
    profile = local_levels_one_sided(test) if test.upper is None else local_levels_two_sided(test)
    _write_csv(fileio.write_profile, profile, args.out)


def _write_csv(writer, obj, out) -> None:
    writer(obj, sys.stdout if out in (None, "-") else out)


def _cmd_curves(args) -> None:
    n, d = args.n, args.d
    x = np.arange(1, args.grid + 1) / args.grid
    cols = {"x": x}
    for kind in ("rho", "r", "r_tilde"):
        cols[kind] = np.asarray(curve_eval(kind, x, n, d), dtype=float)
    rho_tilde = np.full_like(x, math.nan)
    ok = x * n >= 1.0
    if ok.any():
        rho_tilde[ok] = curve_eval("rho_tilde", x[ok], n, d)
    cols["rho_tilde"] = rho_tilde
    _write_csv(fileio.write_curves, cols, args.out)


def _cmd_test(args) -> None:
    test = fileio.read_testdef(args.from_)
    sample = fileio.read_sample(args.data, args.f0_table)
    reject, first = evaluate_test(test, sample)
    m_plus, m_two = minp_statistics(sample)
    hc_plus, hc_two = hc_statistics(sample)
    print(f"decision={'reject' if reject else 'accept'}")
    print(f"first_violation={first if first is not None else 'none'}")
    print(f"n={sample.n}")
    print(f"M_plus={fileio.fmt(m_plus)}")
    print(f"M={fileio.fmt(m_two)}")
    print(f"HC_plus={fileio.fmt(hc_plus)}")
    print(f"HC_two={fileio.fmt(hc_two)}")


def _cmd_approx(args) -> None:
    i, n, t = args.i, args.n, args.t
    if not 1 <= i <= n:
        raise UsageError(f"need 1 <= i <= n, got i={i}, n={n}")
    regime = asymptotics.classify_rank(i, n) if args.regime is None else asymptotics.RankRegime.parse(args.regime)
    if args.regime is not None:
        # an explicit regime far from the rank's class is an error
        asymptotics.h_expansion(i, n, t, regime)
    exact = asymptotics.exact_log_local_level(i, n, t)
    print(f"regime={regime}")
    print(f"exact={fileio.fmt(math.exp(exact))} log={fileio.fmt(exact)}")
    methods = (
        ("poisson", asymptotics.local_level_poisson_approx),
        ("normal", asymptotics.local_level_normal_approx),
        ("explicit", asymptotics.local_level_asymptotic),
    )
    for name, fn in methods:
        try:
            val = fn(i, n, t, regime)
        except (asymptotics.NoApplicableCaseError, asymptotics.RegimeMismatchError) as exc:
            print(f"{name}=n/a ({exc})")
            continue
        ratio = math.exp(val.value - exact)
        print(f"{name}={fileio.fmt(val.linear)} ratio={fileio.fmt(ratio)} formula={val.formula_id}")


def _cmd_mc_level(args) -> None:
    test = fileio.read_testdef(args.from_)
    est, se = mc_level_estimate(test, args.reps, args.seed, args.chunk_size, args.workers)
    print(f"estimate={fileio.fmt(est)}")
    print(f"stderr={fileio.fmt(se)}")
    print(f"reps={args.reps}")
    print(f"seed={args.seed}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goflevels",
        description="Calibrate and analyze GOF tests built on uniform order statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="find the parameter giving level alpha")
    p.add_argument("--family", choices=("ks", "hc", "ell"), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--alpha", type=_unit_open, required=True)
    p.add_argument("--sided", type=int, choices=(1, 2), default=1)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--reps", type=_positive_int, default=100_000, help="Monte Carlo replications")
    p.add_argument("--seed", type=int, help="required with --method mc")
    p.add_argument("--tol", type=float, default=1e-3, help="largest acceptable MC standard error")
    p.add_argument("--out", help="also write the calibrated test as a testdef CSV")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("local-levels", help="write the local-level profile of a test")
    p.add_argument("--from", dest="from_", required=True, metavar="TESTDEF")
    p.add_argument("--out", help="profile CSV path (default stdout)")
    p.set_defaults(func=_cmd_local_levels)

    p = sub.add_parser("curves", help="write HC critical value and rejection curves")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--grid", type=_positive_int, required=True)
    p.add_argument("--out", help="curves CSV path (default stdout)")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("test", help="apply a test to a data sample")
    p.add_argument("--from", dest="from_", required=True, metavar="TESTDEF")
    p.add_argument("--data", required=True)
    p.add_argument("--f0-table", help="x,F table used when the sample asks for '# f0: table'")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("approx", help="compare asymptotic HC local levels with the exact value")
    p.add_argument("--i", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--regime", help="rank regime, e.g. C, A0 or Ac(0.5)")
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("mc-level", help="Monte Carlo estimate of a test's level")
    p.add_argument("--from", dest="from_", required=True, metavar="TESTDEF")
    p.add_argument("--reps", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--chunk-size", type=_positive_int, default=8192)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=_cmd_mc_level)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        args.func(args)
    except (UsageError, fileio.SampleFormatError, OSError) as exc:
        print(f"goflevels {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"goflevels {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
