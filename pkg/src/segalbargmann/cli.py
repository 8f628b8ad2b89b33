"""Command line front end.

    segalbargmann transform --group so --N 5 --s 1 --tau 0.6 --poly "u^2" --mode boosted
    segalbargmann verify --suite magic --N-list 2,3,4 --seed 0
    segalbargmann rate --what free-limit --group so --poly "u^2" --N-list 4,8,16
    segalbargmann mc --group so --N 8 --s 1 --k 2 --samples 2000

Exit codes: 0 success, 1 a check failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .free import free_sb
from .groups import GroupSpec
from .heat import MCConfig, estimate_l2, estimate_moment, write_csv
from .operators import boosted_sb
from .rates import concentration_rate, free_limit_rate, moment_rate, operator_norm_rate
from .tracepoly import DegreeCapError, DiskError, ParseError, TransformParams, load_poly, parse_complex
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# small N is pre-asymptotic for the operator norm
DEFAULT_RATE_N = {"free-limit": [4, 8, 16], "operator-norm": [16, 32, 64, 128]}


class UsageError(Exception):
    pass


def _poly_arg(text: str):
    path = Path(text)
    if path.suffix in (".json", ".txt") and path.is_file():
        return load_poly(path.read_text())
    return load_poly(text)


def _n_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not out or any(N < 1 for N in out):
        raise argparse.ArgumentTypeError("N values must be positive integers")
    return out


def _complex(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_transform(args) -> int:
    P = _poly_arg(args.poly)
    params = TransformParams(args.s, args.tau)
    if args.mode in ("free", "free-inverse"):
        result = free_sb(params, P, inverse=args.mode == "free-inverse")
    else:
        if args.group is None or args.N is None:
            raise UsageError("boosted modes need --group and --N")
        spec = GroupSpec(args.group, args.N)
        result = boosted_sb(params, spec, P, inverse=args.mode == "boosted-inverse")
    _emit(result.to_json(), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, N_list=args.N_list)
    report["command"] = args.argv
    _emit(json.dumps(report, indent=2, default=str), args.output)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_rate(args) -> int:
    fam = args.group or "so"
    if args.N_list is None:
        args.N_list = DEFAULT_RATE_N.get(args.what, [4, 8, 16, 32])
    if len(set(args.N_list)) < 3:
        raise UsageError("refusing to fit a slope with fewer than 3 values of N")
    window = tuple(args.window) if args.window else None
    if args.what == "free-limit":
        params = TransformParams(args.s, args.tau if args.tau is not None else 0.5)
        res = free_limit_rate(fam, _poly_arg(args.poly or "u^2"), params, args.N_list, args.direction, window)
    elif args.what == "concentration":
        res = concentration_rate(fam, _poly_arg(args.poly or "u*v1"), args.s, args.N_list,
                                 args.tau or 0, window)
    elif args.what == "operator-norm":
        res = operator_norm_rate(fam, args.m, args.N_list, order=args.order, window=window)
    else:
        res = moment_rate(fam, args.k, args.s, args.N_list, args.tau or 0, window)
    _emit(res.to_csv(), args.output)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_mc(args) -> int:
    spec = GroupSpec(args.group, args.N)
    cfg = MCConfig(spec, TransformParams(args.s, args.tau or 0), samples=args.samples,
                   seed=args.seed, steps=args.steps)
    if args.poly is not None:
        est = estimate_l2(cfg, _poly_arg(args.poly))
    else:
        est = estimate_moment(cfg, args.k)
    _emit(write_csv([est]), args.output)
    if est.exact_finite_N is None:
        return EXIT_OK
    return EXIT_OK if est.agrees(args.n_se) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="segalbargmann", description=__doc__.split("\n")[0],
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="apply a transform to a trace polynomial",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    t.add_argument("--group", choices=["so", "su", "u", "sp"], help="group family (boosted modes)")
    t.add_argument("--N", type=int, help="matrix size (boosted modes)")
    t.add_argument("--s", type=float, default=1.0, help="heat time s > 0")
    t.add_argument("--tau", type=_complex, default=complex(1.0), help="complex time, e.g. 0.4+0.3i")
    t.add_argument("--poly", required=True, help="polynomial text such as 'u^2 - 3*v1*u' or a JSON file")
    t.add_argument("--mode", choices=["boosted", "boosted-inverse", "free", "free-inverse"], default="boosted")
    t.add_argument("--output", help="write JSON here instead of stdout")
    t.set_defaults(func=cmd_transform)

    v = sub.add_parser("verify", help="run a verification suite",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--N-list", type=_n_list, default=None, help="comma separated sizes; suite defaults otherwise")
    v.add_argument("--output", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("rate", help="tabulate a large-N rate and fit its log-log slope",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    r.add_argument("--what", choices=["free-limit", "concentration", "operator-norm", "moments"], required=True)
    r.add_argument("--group", choices=["so", "su", "u", "sp"], default="so")
    r.add_argument("--N-list", type=_n_list, default=None,
                   help="sizes; defaults 4,8,16 (free-limit), 16,32,64,128 (operator-norm), else 4,8,16,32")
    r.add_argument("--poly", help="polynomial (free-limit: u^2, concentration: u*v1 by default)")
    r.add_argument("--k", type=int, default=1, help="moment index (moments)")
    r.add_argument("--m", type=int, default=4, help="degree of C_m (operator-norm)")
    r.add_argument("--order", type=int, choices=[1, 2], default=1, help="operator-norm comparison order")
    r.add_argument("--s", type=float, default=1.0)
    r.add_argument("--tau", type=_complex, default=None, help="complex time (free-limit defaults to 0.5)")
    r.add_argument("--direction", choices=["forward", "inverse"], default="forward")
    r.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), help="accepted slope range")
    r.add_argument("--output", help="write CSV here")
    r.set_defaults(func=cmd_rate)

    m = sub.add_parser("mc", help="Monte-Carlo moment or L2 estimate against the exact value",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    m.add_argument("--group", choices=["so", "su", "u", "sp"], required=True)
    m.add_argument("--N", type=int, required=True)
    m.add_argument("--s", type=float, default=1.0)
    m.add_argument("--tau", type=_complex, default=None, help="complex time; omitted means the compact group")
    m.add_argument("--k", type=int, default=1)
    m.add_argument("--poly", default=None, help="estimate the squared L2 norm of this polynomial instead")
    m.add_argument("--samples", type=int, default=2000)
    m.add_argument("--steps", type=int, default=None, help="default max(200, ceil(100 s))")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--n-se", type=float, default=4.0, help="agreement threshold in standard errors")
    m.add_argument("--output", help="write CSV here")
    m.set_defaults(func=cmd_mc)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args.argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except (UsageError, DiskError, ParseError, DegreeCapError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
