"""Command line entry point: plots <kind> --in FILE... --out FILE.png"""

from __future__ import annotations

import argparse
import sys

from .errors import SchemaMismatch
from .figures import KINDS, FigureSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from hcrv CSV outputs."
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="FILE", help="input CSV file(s)")
    parser.add_argument("--out", required=True, metavar="FILE.png")
    parser.add_argument("--x", default="n",
                        help="x-axis column for bench curves (default: n)")
    parser.add_argument("--group", default="sampler",
                        help="grouping column for bench curves")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=args.inputs, kind=args.kind, out=args.out,
                      x_column=args.x, group_column=args.group)
    try:
        out = render(spec)
    except SchemaMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
