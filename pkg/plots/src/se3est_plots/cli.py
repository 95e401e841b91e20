"""Command line: plots <kind> --in run.csv --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import FIGURE_KINDS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from se3est run logs.")
    parser.add_argument("kind", choices=FIGURE_KINDS,
                        help="which figure to produce")
    parser.add_argument("--in", dest="input", required=True,
                        help="run-log CSV to read")
    parser.add_argument("--out", dest="output", required=True,
                        help="image file to write (format from the extension)")
    parser.add_argument("--title", default=None, help="optional figure title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(PlotSpec(kind=args.kind, input_path=args.input,
                              output_path=args.output, title=args.title))
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
