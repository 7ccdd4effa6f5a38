"""Command line entry point: muskat-plot <kind> --in CSV... --out IMG."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, PlotJob, render
from .tables import PlotInputError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muskat-plot",
        description="Render figures from muskatlab CSV artifacts")
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="input CSV file(s)")
    parser.add_argument("--out", required=True, metavar="IMG",
                        help="output image (.png or .svg)")
    parser.add_argument("--mode", type=int, default=1,
                        help="tracked Fourier mode for decay plots")
    parser.add_argument("--title", default=None, help="figure title override")
    parser.add_argument("--dpi", type=int, default=150,
                        help="raster resolution for .png output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(kind=args.kind,
                  inputs=tuple(Path(p) for p in args.inputs),
                  output=Path(args.out), mode=args.mode,
                  title=args.title, dpi=args.dpi)
    try:
        out = render(job)
    except PlotInputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:   # pragma: no cover - defensive
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
