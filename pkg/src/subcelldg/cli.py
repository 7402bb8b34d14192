"""Command line interface: run cases, run verification suites, list cases.

Exit codes: 0 success, 2 configuration error, 3 solver abort.
"""
from __future__ import annotations

import argparse
import sys

from .cases import CASES
from .config import ConfigError, parse_config


def _cmd_run(args) -> int:
    from .driver import run
    try:
        cfg = parse_config(args.config, args.set or ())
        result = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"case {cfg.case} [{cfg.preset}]: {result.status} after "
          f"{result.steps} steps, t = {result.t:.6g}, "
          f"wall {result.wall_time:.1f}s")
    print(f"  min rho {result.min_rho:.6g}, min p {result.min_p:.6g}, "
          f"mean alpha {result.alpha_run_mean:.3e}, "
          f"max drift {result.drift.max():.3e}")
    print(f"  outputs in {result.outdir}")
    if result.status != "ok":
        print(f"  abort: {result.message}", file=sys.stderr)
        return 3
    return 0


def _cmd_verify(args) -> int:
    from .verification import SUITES, run_suite
    names = args.suite or list(SUITES)
    try:
        reports = run_suite(names)
    except KeyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    machine = []
    ok = True
    for rep in reports:
        for line in rep.lines():
            print(line)
        machine.extend(rep.machine_lines())
        ok &= rep.passed
    out = args.out or "verify_report.txt"
    with open(out, "w") as fh:
        fh.write("\n".join(machine) + "\n")
    print(f"report written to {out}")
    return 0 if ok else 1


def _cmd_list_cases(_args) -> int:
    for cid, case in sorted(CASES.items()):
        presets = ", ".join(
            f"{name}: {p['nx']}x{p['ny']} N={p['degree']}"
            for name, p in case.presets.items())
        print(f"{cid:12s} {case.description}")
        print(f"{'':12s}   equation: {case.equation}   presets: {presets}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="subcelldg",
        description="2D DG spectral element solver with subcell FV limiting")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured case")
    p_run.add_argument("--config", help="INI config file", default=None)
    p_run.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config key")
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify", help="run verification suites")
    p_ver.add_argument("--suite", action="append",
                       help="suite name (prop1, prop2, equivalence); "
                            "default all")
    p_ver.add_argument("--out", help="machine-readable report path")
    p_ver.set_defaults(func=_cmd_verify)

    p_list = sub.add_parser("list-cases", help="list the packaged cases")
    p_list.set_defaults(func=_cmd_list_cases)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
