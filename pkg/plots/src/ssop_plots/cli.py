"""Command line: ``ssop-plots --figure err_vs_time --input out/error_vs_time.csv
--out fig4.pdf``; multiple ``--input`` flags feed multi-panel families."""

from __future__ import annotations

import argparse
import sys

from ssop_plots.figures import FIGURE_FAMILIES, FigureSpec, render
from ssop_plots.schema import SchemaMismatch


def build_parser():
    parser = argparse.ArgumentParser(prog="ssop-plots", description=__doc__)
    parser.add_argument("--figure", required=True, choices=sorted(FIGURE_FAMILIES),
                        help="figure family to render")
    parser.add_argument("--input", required=True, action="append",
                        help="input CSV (repeat for multi-panel families)")
    parser.add_argument("--out", required=True, help="output image path (.png/.pdf/.svg)")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear error axis (default log)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        figure_id=args.figure,
        inputs=args.input,
        out_path=args.out,
        log_y=not args.linear_y,
    )
    try:
        out = render(spec)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
