"""Command line interface: ``run``, ``check`` and ``oracle`` subcommands."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError


def _cmd_run(args):
    from .driver import run
    cfg = load_config(args.config)
    result = run(cfg)
    last = {k: v[-1] for k, v in result.diagnostics.items()}
    print(f"completed {int(last['step'])} steps to t = {last['t']:.6e} s")
    print(f"max |Psi_U| components at final step: "
          f"{last['max_psi_u_1']:.3e}, {last['max_psi_u_2']:.3e}")
    if result.diagnostics_file:
        print(f"diagnostics: {result.diagnostics_file}")
    if result.snapshot_files:
        print(f"snapshots:   {len(result.snapshot_files)} files in "
              f"{cfg.run.output_dir}")
    return 0


def _cmd_check(args):
    from .timestepping import (IMEX_TABLES, SSP_EXPLICIT, explicit_order,
                               validate_pair)
    from .verification import gram_report

    failures = 0
    if args.config:
        try:
            cfg = load_config(args.config)
            from .driver import make_operators
            make_operators(cfg)
            print(f"config {args.config}: OK "
                  f"(scenario {cfg.run.scenario!r}, p={cfg.scheme.p})")
        except ConfigError as exc:
            print(f"config {args.config}: INVALID: {exc}")
            failures += 1

    for name, pair in IMEX_TABLES.items():
        order = 2 if name == "ssp2_222" else 1
        bad = validate_pair(pair, ssp_order=order)
        status = "OK" if not bad else "FAIL: " + "; ".join(bad)
        print(f"IMEX pair {name!r}: {status}")
        failures += bool(bad)

    for k, (A, b) in SSP_EXPLICIT.items():
        got = explicit_order(A, b)
        status = "OK" if got >= k else f"FAIL (order {got})"
        print(f"SSP{k} tableau: {status}")
        failures += got < k

    worst = gram_report()
    status = "OK" if worst < 1e-13 else "FAIL"
    print(f"basis Gram deviation (p <= 5): {worst:.3e} {status}")
    failures += worst >= 1e-13
    return 1 if failures else 0


def _cmd_oracle(args):
    from .verification import oracle_sweep
    rep = oracle_sweep(n=args.samples, seed=args.seed)
    print("interface Riemann solver sweep (closed form vs damped Newton)")
    for line in rep.lines():
        print("  " + line)
    ok = (rep.max_error <= 1e-10 and rep.max_idempotency_error <= 1e-12
          and rep.admissible_fraction == 1.0 and rep.oracle_failures == 0)
    print("result: " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="relaxdg",
        description="Coupled-interface RKDG solver driver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser(
        "check", help="validate config, tableaux and basis orthonormality")
    p_check.add_argument("config", nargs="?", default=None)
    p_check.set_defaults(func=_cmd_check)

    p_oracle = sub.add_parser(
        "oracle", help="closed-form vs root-finder Riemann solver sweep")
    p_oracle.add_argument("--samples", type=int, default=1000)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.set_defaults(func=_cmd_oracle)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
