"""Risk-vs-depth curves from a risk summary CSV, with the published values
overlaid as reference points.

Inputs: the `_summary.csv` emitted by the risk/reproduce commands (columns
example, ell, mean_h2, std_h2) and optionally a comparison CSV (columns
label, published) whose labels are `ell=<k>`.
"""
from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, read_csv_records, run_main


def build_figure(summary_rows: list[dict], overlay_rows: list[dict] | None = None):
    """The figure and the number of overlay points drawn."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_example: dict[int, list[dict]] = {}
    for row in summary_rows:
        by_example.setdefault(int(row["example"]), []).append(row)

    all_ells: set[int] = set()
    for example, rows in sorted(by_example.items()):
        rows.sort(key=lambda r: int(r["ell"]))
        ells = [int(r["ell"]) for r in rows]
        means = [float(r["mean_h2"]) for r in rows]
        stds = [float(r["std_h2"]) for r in rows]
        all_ells.update(ells)
        ax.plot(ells, means, marker="o", label=f"example {example} (measured)")
        ax.fill_between(
            ells,
            [m - s for m, s in zip(means, stds)],
            [m + s for m, s in zip(means, stds)],
            alpha=0.2,
        )

    overlay_count = 0
    if overlay_rows:
        pts = []
        for row in overlay_rows:
            label = row["label"]
            if not label.startswith("ell="):
                raise SchemaError(f"overlay label {label!r} is not of the form ell=<k>")
            pts.append((int(label[4:]), float(row["published"])))
        pts.sort()
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], marker="x",
                   color="black", zorder=3, label="published")
        overlay_count = len(pts)
        all_ells.update(p[0] for p in pts)

    ax.set_xticks(sorted(all_ells))
    ax.set_xlabel("depth cap")
    ax.set_ylabel("mean squared Hellinger risk")
    ax.legend()
    fig.tight_layout()
    return fig, overlay_count


def render(input_path, out_path, overlay_path=None) -> int:
    summary = read_csv_records(input_path, ("example", "ell", "mean_h2", "std_h2"))
    overlay = (
        read_csv_records(overlay_path, ("label", "published")) if overlay_path else None
    )
    fig, count = build_figure(summary, overlay)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return count


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", required=True, help="risk summary CSV")
    parser.add_argument("--overlay", default=None,
                        help="comparison CSV with published values")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    return run_main(lambda: render(args.input, args.out, args.overlay))


if __name__ == "__main__":
    sys.exit(main())
