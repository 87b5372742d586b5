"""Markdown risk table from a paper-vs-measured comparison CSV.

Input: the `<figure>_<example>_comparison.csv` written by the reproduce
command (columns label, published, measured, rel_dev).
"""
from __future__ import annotations

import argparse
import sys

from .io import read_csv_records, run_main

REQUIRED = ("label", "published", "measured", "rel_dev")


def build_table(rows: list[dict]) -> str:
    lines = [
        "| quantity | published | measured | relative deviation |",
        "| --- | ---: | ---: | ---: |",
    ]
    for row in rows:
        lines.append(
            "| {label} | {published:.3f} | {measured:.4f} | {rel_dev:+.1%} |".format(
                label=row["label"],
                published=float(row["published"]),
                measured=float(row["measured"]),
                rel_dev=float(row["rel_dev"]),
            )
        )
    return "\n".join(lines) + "\n"


def render(input_path, out_path) -> int:
    rows = read_csv_records(input_path, REQUIRED)
    text = build_table(rows)
    with open(out_path, "w") as fh:
        fh.write(text)
    return len(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", required=True, help="comparison CSV")
    parser.add_argument("--out", required=True, help="output markdown path")
    args = parser.parse_args(argv)
    return run_main(lambda: render(args.input, args.out))


if __name__ == "__main__":
    sys.exit(main())
