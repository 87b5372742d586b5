"""Side-by-side heatmaps of the selected estimator and the true transition
density, on a shared color scale and without smoothing, so the dyadic cell
structure of the estimator stays visible.

Inputs: the density_grid.csv and truth_grid.csv written by the estimate
command (dense square matrices on the same midpoint grid).
"""
from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_grid, run_main


def build_figure(estimate_grid: np.ndarray, truth_grid: np.ndarray):
    if estimate_grid.shape != truth_grid.shape:
        raise SchemaError(
            f"grid shapes differ: {estimate_grid.shape} vs {truth_grid.shape}"
        )
    vmax = float(max(estimate_grid.max(), truth_grid.max()))
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.6))
    for ax, grid, title in (
        (axes[0], estimate_grid, "selected estimator"),
        (axes[1], truth_grid, "transition density"),
    ):
        # origin at (0, 0), source state on x; no interpolation between cells
        im = ax.imshow(grid.T, origin="lower", extent=(0, 1, 0, 1),
                       vmin=0.0, vmax=vmax, interpolation="nearest",
                       aspect="equal")
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.colorbar(im, ax=axes, fraction=0.046)
    return fig, vmax


def render(input_path, truth_path, out_path) -> float:
    fig, vmax = build_figure(read_grid(input_path), read_grid(truth_path))
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return vmax


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", required=True, help="estimator grid CSV")
    parser.add_argument("--truth", required=True, help="true-density grid CSV")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    return run_main(lambda: render(args.input, args.truth, args.out))


if __name__ == "__main__":
    sys.exit(main())
