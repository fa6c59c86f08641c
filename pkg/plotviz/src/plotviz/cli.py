"""Command-line entry point.

Usage: plot <kind> --in run1.csv[,run2.csv,...] --out fig.png

Kinds: timeseries (per-axis tracking error), iso3d (3-D flight path
with reference), estimation (force-estimate error plus stiffness and
vertical-force traces), batch-overlay (pale per-run lines, solid mean,
dashed worst run).  Exit codes: 0 success, 2 bad usage or input.
"""

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .runcsv import PlotError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render figures from simulation run CSVs")
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="inputs", required=True,
                        metavar="CSV[,CSV...]",
                        help="comma-separated run CSV paths")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--no-mean-emphasis", action="store_true",
                        help="draw the batch mean without extra line weight")
    parser.add_argument("--no-worst-highlight", action="store_true",
                        help="skip the dashed worst-run line")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    paths = [p.strip() for p in args.inputs.split(",") if p.strip()]
    try:
        spec = FigureSpec(kind=args.kind, inputs=paths, out=args.out,
                          mean_emphasis=not args.no_mean_emphasis,
                          worst_highlight=not args.no_worst_highlight)
        out = render(spec)
    except PlotError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
