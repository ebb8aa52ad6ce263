"""Command line entry point: ``plot --spec <file>``."""

import argparse
import sys

from .render import SchemaError, render
from .spec import SpecError, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render mean +/- std convergence figures from teamfp "
                    "aggregate CSVs.")
    parser.add_argument("--spec", required=True,
                        help="JSON plot specification file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec)
        render(spec)
    except (SpecError, SchemaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {spec.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
