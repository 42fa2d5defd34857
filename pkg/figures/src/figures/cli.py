"""Command-line entry point: qite-figs --kind <k> --in <csv> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .render import FIGURE_KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qite-figs",
        description="Render an SVG figure from a qite experiment CSV.",
    )
    p.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    p.add_argument("--in", dest="input_csv", required=True,
                   help="experiment CSV produced by the qite CLI")
    p.add_argument("--out", dest="output", required=True,
                   help="output SVG path")
    p.add_argument("--floor", type=float, default=0.0,
                   help="resource_convergence only: exclude errors at or "
                        "below this level from the least-squares fit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv, figure_kind=args.kind,
                      output=args.output, floor=args.floor)
    try:
        out = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
