"""Command line interface: render one plot job from a run directory."""
from __future__ import annotations

import argparse
import sys

from .plots import KINDS, PlotJob, plot


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="render figures from subcelldg run outputs")
    parser.add_argument("command", choices=["plot"])
    parser.add_argument("--dir", required=True, help="run output directory")
    parser.add_argument("--kind", default="field_contour", choices=KINDS)
    parser.add_argument("--var", default="rho", help="field name to render")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--snap", type=int, default=-1,
                        help="snapshot index (default: last)")
    parser.add_argument("--vmin", type=float, default=None)
    parser.add_argument("--vmax", type=float, default=None)
    args = parser.parse_args(argv)
    try:
        job = PlotJob(rundir=args.dir, kind=args.kind, var=args.var,
                      out=args.out, snap=args.snap, vmin=args.vmin,
                      vmax=args.vmax)
        path = plot(job)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"plotview: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
