"""Command line front end: ``plots render --kind <k> --in <csv> --out <img>``."""

from __future__ import annotations

import argparse
import sys

from .render import FigureKind, FigureSpec, PlotError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from experiment CSV summaries."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a CSV summary")
    p.add_argument("--kind", required=True, choices=[k.value for k in FigureKind],
                   help="which view of the CSV to draw")
    p.add_argument("--in", dest="input_csv", required=True,
                   help="input CSV summary path")
    p.add_argument("--out", required=True, help="output image path (.png or .svg)")
    p.add_argument("--no-reference", action="store_true",
                   help="drop the reference-slope overlay")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input_csv,
        kind=FigureKind(args.kind),
        output=args.out,
        reference=not args.no_reference,
    )
    try:
        out = render(spec)
    except PlotError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
