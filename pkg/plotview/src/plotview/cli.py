"""Command-line entry point: ``plotview --kind figure1|expectation --in PATH --out PATH``."""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, SchemaError, render

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="Render experiment CSV exports to images",
    )
    parser.add_argument("--kind", choices=["figure1", "expectation"], required=True)
    parser.add_argument("--in", dest="input_path", required=True, metavar="PATH")
    parser.add_argument("--out", dest="output_path", required=True, metavar="PATH")
    args = parser.parse_args(argv)
    job = PlotJob(input_path=args.input_path, kind=args.kind,
                  output_image_path=args.output_path)
    try:
        render(job)
    except FileNotFoundError as exc:
        print(f"input not found: {exc.filename}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"schema error in {args.input_path}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
