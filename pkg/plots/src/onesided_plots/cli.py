"""Batch plotting CLI: ``plots <kind> --in <csv> --out <png> [--labels <file>]``."""

from __future__ import annotations

import argparse
import sys

from .plotting import KINDS, MissingColumnError, PlotJob, render


def cli(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("kind", choices=list(KINDS))
    parser.add_argument("--in", dest="input", required=True,
                        help="sweep/rankdep CSV, or factor-file prefix for factor_scatter")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--labels", help="optional label file for factor_scatter")
    parser.add_argument("--group-by", default="algorithm")
    parser.add_argument("--seed", type=int, default=0)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    job = PlotJob(
        input=args.input,
        kind=args.kind,
        output=args.out,
        group_by=args.group_by,
        labels=args.labels,
        seed=args.seed,
    )
    try:
        result = render(job)
    except MissingColumnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if job.kind == "rankdep":
        print(f"slope={result:.4f}")
    print(f"wrote {job.output}")
    return 0


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
