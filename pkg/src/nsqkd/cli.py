"""Command-line front end: rates, threshold, curve, simulate, verify-bounds.

Exit codes: 0 success, 1 usage or input error, 2 numerical or verification
failure.  The resolved parameters of every run are echoed to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from nsqkd.exceptions import (
    GuardError,
    InputError,
    InsufficientDataError,
    SolverError,
    StructuralError,
)
from nsqkd.keyrate import KeyRateReport, curve, key_rate_report, threshold
from nsqkd.nsbox import min_chain_given_marginal
from nsqkd.simulator import ProtocolConfig, achievable_key_length, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
BOUND_SLACK = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _precision(text: str) -> int | None:
    if text == "full":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("precision must be an integer or 'full'")
    if not 0 <= value <= 17:
        raise argparse.ArgumentTypeError("precision must lie in 0..17")
    return value


def _n_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(value: float, precision: int | None) -> str:
    return repr(float(value)) if precision is None else f"{value:.{precision}f}"


def _add_precision(parser, default=6):
    parser.add_argument("--precision", type=_precision, default=default,
                        help=f"decimals in numeric output, or 'full' (default {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("rates", help="key rate at one (N, p) point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--preprocess", action="store_true")
    _add_precision(p)

    p = sub.add_parser("threshold", help="noise threshold p* for one N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--preprocess", action="store_true")
    _add_precision(p, default=5)

    p = sub.add_parser("curve", help="key-rate table over a purity grid")
    p.add_argument("--n-list", type=_n_list, default=[2, 3, 5, 10])
    p.add_argument("--p-min", type=float, default=0.85)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--preprocess", action="store_true")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    _add_precision(p)

    p = sub.add_parser("simulate", help="Monte-Carlo protocol run")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--qprime", type=float, default=0.9)
    p.add_argument("--adversarial", action="store_true")
    p.add_argument("--flip-r", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="transcript CSV path")
    _add_precision(p)

    p = sub.add_parser("verify-bounds", help="LP check of CHAIN >= 2 P(b|y) - 1")
    p.add_argument("--n", type=int, required=True)
    _add_precision(p)
    return parser


def _echo(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "verb"}
    if resolved.get("precision", 0) is None:
        resolved["precision"] = "full"
    parts = " ".join(f"{k}={v}" for k, v in resolved.items())
    print(f"nsqkd {args.verb}: {parts}", file=sys.stderr)


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline="\n", encoding="ascii"), True


def _p_grid(p_min: float, p_max: float, step: float) -> list[float]:
    if step <= 0 or p_max < p_min or not 0.0 <= p_min <= 1.0 or not 0.0 <= p_max <= 1.0:
        raise InputError("need 0 <= p-min <= p-max <= 1 and step > 0")
    n = int(round((p_max - p_min) / step))
    grid = [round(p_min + k * step, 12) for k in range(n + 1)]
    return [p for p in grid if p <= p_max + 1e-12]


def cmd_rates(args) -> int:
    report = key_rate_report(args.n, args.p, args.preprocess)
    print(KeyRateReport.CSV_HEADER)
    print(report.csv_row(args.precision))
    return EXIT_OK


def cmd_threshold(args) -> int:
    value = threshold(args.n, args.preprocess)
    print(_fmt(value, args.precision))
    return EXIT_OK


def cmd_curve(args) -> int:
    reports = curve(args.n_list, _p_grid(args.p_min, args.p_max, args.step), args.preprocess)
    try:
        fh, close = _open_out(args.out)
    except OSError as exc:
        print(f"nsqkd: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        fh.write(KeyRateReport.CSV_HEADER + "\n")
        for report in reports:
            fh.write(report.csv_row(args.precision) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = ProtocolConfig(
        N=args.n, p=args.p, rounds=args.rounds, q=args.q, qprime=args.qprime,
        flip_r=args.flip_r, seed=args.seed, adversarial=args.adversarial,
    )
    transcript, report = run(config)
    if args.out is not None:
        try:
            with open(args.out, "w", newline="\n", encoding="ascii") as fh:
                transcript.write_csv(fh)
        except OSError as exc:
            print(f"nsqkd: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    for line in report.summary_lines():
        print(line)
    print(f"achievable_key_bits,{achievable_key_length(report, config)}")
    return EXIT_OK


def cmd_verify_bounds(args) -> int:
    print("beta,lp_min,bound")
    failed = False
    for beta in np.round(np.linspace(0.0, 1.0, 11), 10):
        value = min_chain_given_marginal(args.n, float(beta))
        bound = max(0.0, 2.0 * beta - 1.0)
        ok = value >= bound - BOUND_SLACK
        failed |= not ok
        print(f"{_fmt(beta, 1)},{_fmt(value, args.precision)},{_fmt(bound, args.precision)}"
              + ("" if ok else ",VIOLATED"))
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {
    "rates": cmd_rates,
    "threshold": cmd_threshold,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "verify-bounds": cmd_verify_bounds,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _echo(args)
    try:
        return COMMANDS[args.verb](args)
    except (InputError, GuardError, StructuralError, InsufficientDataError) as exc:
        print(f"nsqkd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"nsqkd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
