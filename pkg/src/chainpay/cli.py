"""``chainpay`` command line.

Exit status: 0 on a passing verdict or success, 1 when a property fails or
a profitable attack exists, 2 on usage or input errors. Reports go to
stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .attacks import best_attack
from .errors import ChainPayError
from .mechanisms import Mechanism, make_mechanism
from .properties import CheckBounds, PropertySpec, check_property
from .rational import fmt, to_rational
from .simulator import SimConfig, Strategy, run_batch

log = logging.getLogger("chainpay")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment line. Keys are long flag names."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def parse_pmf(text: str) -> dict[int, float]:
    """``"0:1/2,2:1/2"`` -> ``{0: 0.5, 2: 0.5}``."""
    pmf = {}
    for item in text.split(","):
        count, sep, prob = item.partition(":")
        if not sep:
            raise UsageError(f"bad pmf entry {item!r}; expected count:probability")
        pmf[int(count)] = float(to_rational(prob))
    return pmf


def _threads(args) -> int:
    if args.threads is not None:
        return int(args.threads)
    return int(os.environ.get("CHAINPAY_THREADS", "1"))


def _mech(args) -> Mechanism:
    if not args.mech:
        raise UsageError("--mech is required")
    return make_mechanism(args.mech, args.rmax)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _json(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def cmd_check(args) -> int:
    if not args.prop:
        raise UsageError("--prop is required")
    mech = _mech(args)
    prop = PropertySpec.parse(args.prop, epsilon=args.eps, delta=args.delta, gamma=args.gamma)
    bounds = CheckBounds(args.tmax, args.nmax, args.pmax)
    report = check_property(mech, prop, bounds)
    _emit(_json({"mechanism": mech.describe(), **report.to_dict()}), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_attack(args) -> int:
    if args.t is None:
        raise UsageError("--t is required")
    mech = _mech(args)
    result = best_attack(mech, args.kind, t=args.t, k=args.k, n_max=args.nmax, p_max=args.pmax)
    _emit(_json({"mechanism": mech.describe(), **result.to_dict()}), args.out)
    return EXIT_FAIL if result.profitable else EXIT_OK


def cmd_prove(args) -> int:
    if args.horizon is None:
        raise UsageError("--horizon is required")
    if args.theorem == "impossibility":
        report = analysis.verify_impossibility(args.horizon)
        ok = report.contradicts_scr
    else:
        report = analysis.verify_wta_structure(args.horizon)
        ok = report.interior_forced
    _emit(_json(report.to_dict()), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_region(args) -> int:
    grid = analysis.region_scan(
        args.step_delta, args.step_eps, args.step_gamma, args.eps_max, threads=_threads(args)
    )
    _emit(grid.to_csv(), args.out)
    return EXIT_OK


def cmd_pay(args) -> int:
    if args.t is None:
        raise UsageError("--t is required")
    mech = _mech(args)
    sys.stdout.write(" ".join(fmt(x) for x in mech.chain_payments(args.t)) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not args.pmf:
        raise UsageError("--pmf is required (e.g. '0:1/2,2:1/2')")
    mech = _mech(args)
    config = SimConfig(
        offspring_pmf=parse_pmf(args.pmf),
        exec_prob=float(to_rational(args.exec_prob)),
        exec_by_depth=parse_pmf(args.exec_by_depth) if args.exec_by_depth else {},
        max_rounds=args.max_rounds,
        population_cap=args.population_cap,
        sybil_cost=to_rational(args.sybil_cost),
        sybil_n_max=args.sybil_nmax,
        strategy=Strategy(args.strategy),
        seed=args.seed,
    )
    batch = run_batch(config, mech, args.runs, threads=_threads(args))
    _emit(_json(batch.to_dict()), args.out)
    if args.per_run:
        Path(args.per_run).write_text(batch.per_run_csv(), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' defaults")
    common.add_argument("--rmax", default="1", help="budget R_max (default 1)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default $CHAINPAY_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    mech_help = "wta[:payout] | gdgeom:gamma,delta | dgeom:delta | topdown | table:path"
    parser = argparse.ArgumentParser(prog="chainpay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="audit a mechanism for one property")
    p.add_argument("--mech", help=mech_help)
    p.add_argument("--prop", help="DSP, EpsDSP, CP, BB, SCR, WCR, DeltaSCR, GammaSEC")
    p.add_argument("--eps")
    p.add_argument("--delta")
    p.add_argument("--gamma")
    p.add_argument("--tmax", type=int, default=10)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--pmax", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("attack", parents=[common], help="search the best sybil or collapse move")
    p.add_argument("--mech", help=mech_help)
    p.add_argument("--kind", choices=["sybil", "collapse"], default="sybil")
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--pmax", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("prove", parents=[common], help="finite-horizon theorem checks")
    p.add_argument("--theorem", choices=["impossibility", "wta"], default="impossibility")
    p.add_argument("--horizon", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("region", parents=[common], help="scan the (delta, epsilon, gamma) grid")
    p.add_argument("--step-delta", default="1/8")
    p.add_argument("--step-eps", default="1/8")
    p.add_argument("--step-gamma", default="1/8")
    p.add_argument("--eps-max", default="2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("pay", parents=[common], help="print chain payments for length t")
    p.add_argument("--mech", help=mech_help)
    p.add_argument("--t", type=int)
    p.set_defaults(func=cmd_pay)

    p = sub.add_parser("simulate", parents=[common], help="grow recruitment trees")
    p.add_argument("--mech", help=mech_help)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--pmf", help="offspring distribution, e.g. '0:1/2,2:1/2'")
    p.add_argument("--exec-prob", default="1/10")
    p.add_argument("--exec-by-depth", help="per-depth execution overrides, e.g. '4:1'")
    p.add_argument("--max-rounds", type=int, default=1000)
    p.add_argument("--population-cap", type=int, default=1_000_000)
    p.add_argument("--sybil-cost", default="0")
    p.add_argument("--sybil-nmax", type=int, default=10)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="honest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--per-run", help="also write a per-run CSV here")
    p.set_defaults(func=cmd_simulate)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    """Install config-file values as subcommand defaults, so explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    command = next((a for a in argv if not a.startswith("-")), None)
    subparsers = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    target = subparsers.choices.get(command)
    if target is None:
        return
    values = read_config(known.config)
    dests = {a.dest for a in target._actions}
    unknown = sorted(set(values) - dests)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    for action in target._actions:
        if action.dest in values:
            action.required = False
    target.set_defaults(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (UsageError, OSError) as exc:
        print(f"chainpay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, ChainPayError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"chainpay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
