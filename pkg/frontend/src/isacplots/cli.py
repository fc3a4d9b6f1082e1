"""Command-line entry point: CSV results in, figure image out.

Exit codes: 0 success, 2 schema or usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import render, schema

KINDS = {"ccdf": render.render_ccdf, "rmse": render.render_rmse}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isac-plot",
        description="render experiment result CSVs to figures")
    parser.add_argument("--kind", required=True, choices=sorted(KINDS))
    parser.add_argument("--in", dest="infile", required=True,
                        help="input CSV (thzisac results schema)")
    parser.add_argument("--out", required=True,
                        help="output image path (extension selects format)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows = schema.load_rows(args.infile)
        KINDS[args.kind](rows, args.out)
    except schema.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
