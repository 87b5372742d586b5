"""Command-line interface: simulate chains, run the selection rule, score risks
against the closed-form densities, reproduce the published tables and benchmark
the kernel backends.

Exit codes: 0 success, 2 validation, 3 I/O, 4 capacity guard.
"""
from __future__ import annotations

import csv
import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import backend as _backend
from . import reference_values as refs
from .errors import CapacityError, IOFailure, MctdError, ValidationError
from .loss import QuadSpec
from .select import select
from .sim import (
    EXAMPLES,
    ExperimentConfig,
    run_experiment,
    simulate,
    true_density,
)
from .stats import evaluate_grid, read_sample_csv, write_sample_csv

_EXIT_CODES = {ValidationError: 2, IOFailure: 3, CapacityError: 4}


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("MCTD_THREADS")
    return int(env) if env else 1


def _load_sample(example, input_path, n, seed, burn_in=None):
    if (example is None) == (input_path is None):
        raise ValidationError("give exactly one of --example and --input")
    if example is not None:
        return simulate(example, n, seed, burn_in=burn_in)
    return read_sample_csv(input_path)


_example_opt = click.option("--example", type=int, default=None,
                            help="Benchmark chain id (1..7).")
_seed_opt = click.option("--seed", type=int, default=0, show_default=True)
_L_opt = click.option("--L", "L", type=float, default=0.03, show_default=True,
                      help="Penalty scale.")
_quad_opt = click.option("--quad-order", type=int, default=16, show_default=True,
                         help="Gauss-Legendre order for risk integrals.")
_threads_opt = click.option("--threads", type=int, default=None,
                            help="Replicate workers (default: MCTD_THREADS or 1).")


@click.group()
def cli():
    """Transition-density estimation on recursive dyadic partitions."""


@cli.command()
@_example_opt
@click.option("--n", type=int, default=1000, show_default=True)
@_seed_opt
@click.option("--burn-in", type=int, default=None,
              help="Override the chain's burn-in length.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def simulate_cmd(example, n, seed, burn_in, out):
    """Simulate a benchmark chain and write X_0..X_n as CSV."""
    if example is None:
        raise ValidationError("--example is required; valid ids are 1..7")
    sample = simulate(example, n, seed, burn_in=burn_in)
    write_sample_csv(out, sample)
    click.echo(f"wrote {sample.n + 1} rows to {out} (example {example}, seed {seed})")


cli.add_command(simulate_cmd, name="simulate")


@cli.command()
@_example_opt
@click.option("--input", "input_path", type=click.Path(exists=False), default=None,
              help="Sample CSV (headerless, one coordinate row per step).")
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--ell", type=int, default=7, show_default=True, help="Depth cap.")
@_L_opt
@_seed_opt
@click.option("--grid", type=int, default=256, show_default=True,
              help="Evaluation grid resolution.")
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Output directory.")
def estimate_cmd(example, input_path, n, ell, L, seed, grid, out):
    """Run the selection rule; write the result JSON and an evaluation grid CSV."""
    sample = _load_sample(example, input_path, n, seed)
    result = select(sample, L, ell)
    outdir = Path(out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "result.json").write_text(result.to_json())
    except OSError as exc:
        raise IOFailure(f"cannot write results to {outdir}: {exc}") from exc
    if sample.d == 1:
        np.savetxt(outdir / "density_grid.csv", evaluate_grid(result.estimate, grid),
                   delimiter=",")
        if example is not None:
            truth = true_density(example)
            mids = (np.arange(grid) + 0.5) / grid
            np.savetxt(outdir / "truth_grid.csv",
                       truth.pdf(mids[:, None], mids[None, :]), delimiter=",")
    click.echo(
        f"selected {len(result.partition.cells)} cells, objective {result.objective:.6g}, "
        f"backend {result.diagnostics['backend']}, "
        f"in-square fraction {sample.in_square_fraction():.3f}"
    )


cli.add_command(estimate_cmd, name="estimate")


def _run_risk(example, n, ells, L, seed, replicates, quad_order, threads,
              oracle, out):
    cfg = ExperimentConfig(
        example=example, n=n, levels=tuple(ells), L=L, replicates=replicates,
        base_seed=seed, quad=QuadSpec(order=quad_order), with_oracle=oracle,
        threads=_threads(threads),
    )
    report = run_experiment(cfg)
    report.write_csv(out)
    return report


@cli.command()
@_example_opt
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--ell", type=int, multiple=True, default=(7,), show_default=True)
@_L_opt
@_seed_opt
@click.option("--replicates", type=int, default=100, show_default=True)
@_quad_opt
@_threads_opt
@click.option("--oracle/--no-oracle", default=False, show_default=True,
              help="Also compute the true-risk oracle per replicate.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def risk_cmd(example, n, ell, L, seed, replicates, quad_order, threads, oracle, out):
    """Monte-Carlo risk of the selected estimator; writes the report CSV."""
    if example is None:
        raise ValidationError("--example is required; valid ids are 1..7")
    report = _run_risk(example, n, ell, L, seed, replicates, quad_order,
                       threads, oracle, out)
    for rec in report.summary():
        click.echo(f"example {rec['example']} ell {rec['ell']}: "
                   f"mean H2 {rec['mean_h2']:.4f} over {rec['replicates']} replicates")


cli.add_command(risk_cmd, name="risk")


@cli.command()
@click.argument("figure", type=click.Choice(["figure2", "figure4", "figure5"]))
@click.option("--example", type=int, default=1, show_default=True)
@click.option("--replicates", type=int, default=None,
              help="Default: 100 for figure2, 250 for figure4/figure5.")
@_seed_opt
@_quad_opt
@_threads_opt
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Output directory.")
def reproduce_cmd(figure, example, replicates, seed, quad_order, threads, out):
    """Re-run a published table's settings and emit paper-vs-measured columns."""
    outdir = Path(out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create {outdir}: {exc}") from exc

    if figure == "figure2":
        replicates = replicates if replicates is not None else 100
        levels = tuple(range(1, 11))
        with_oracle = False
    else:
        replicates = replicates if replicates is not None else 250
        levels = (7,)
        with_oracle = figure == "figure4"
    cfg = ExperimentConfig(
        example=example, n=1000, levels=levels, L=0.03, replicates=replicates,
        base_seed=seed, quad=QuadSpec(order=quad_order),
        with_oracle=with_oracle, compute_l2=True, threads=_threads(threads),
    )
    report = run_experiment(cfg)
    report.write_csv(outdir / f"{figure}_ex{example}.csv")
    summary = {rec["ell"]: rec for rec in report.summary()}

    rows = []
    if figure == "figure2":
        for ell in levels:
            rows.append(("ell=%d" % ell, refs.FIGURE2_RISK[(ell, example)],
                         summary[ell]["mean_h2"]))
    elif figure == "figure4":
        rec = summary[7]
        for label in ("mean_h2", "mean_oracle_h2", "ratio_q50", "ratio_q75",
                      "ratio_q90", "ratio_q95"):
            rows.append((label, refs.FIGURE4[label][example], rec[label]))
    else:
        rows.append(("mean_l2", refs.FIGURE5_L2[example], summary[7]["mean_l2"]))

    cmp_path = outdir / f"{figure}_ex{example}_comparison.csv"
    try:
        with open(cmp_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "published", "measured", "rel_dev"])
            for label, pub, meas in rows:
                writer.writerow([label, pub, meas, (meas - pub) / pub])
    except OSError as exc:
        raise IOFailure(f"cannot write {cmp_path}: {exc}") from exc
    for label, pub, meas in rows:
        click.echo(f"{label}: published {pub} measured {meas:.4f}")


cli.add_command(reproduce_cmd, name="reproduce")


@cli.command()
@click.option("--n", "ns", type=int, multiple=True, default=(500, 1000, 2000),
              show_default=True)
@click.option("--ell", "ells", type=int, multiple=True, default=(3, 4, 5, 6),
              show_default=True)
@_seed_opt
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def bench_cmd(ns, ells, seed, out):
    """Time the selection rule per backend over a grid of (n, ell)."""
    rows = []
    for n in ns:
        sample = simulate(1, n, [seed, n])
        for ell in ells:
            for backend in _backend.available_backends():
                t0 = time.perf_counter()
                result = select(sample, 0.03, ell, backend=backend)
                elapsed = time.perf_counter() - t0
                rows.append({
                    "backend": backend, "n": n, "ell": ell,
                    "seconds": elapsed,
                    "cube_visits": result.diagnostics["cube_visits"],
                })
    try:
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        raise IOFailure(f"cannot write {out}: {exc}") from exc

    # Fitted scaling: log-time vs log(n ell + ell 4^(ell+1)) per backend.
    for backend in _backend.available_backends():
        sub = [r for r in rows if r["backend"] == backend]
        x = np.log([r["n"] * r["ell"] + r["ell"] * 4.0 ** (r["ell"] + 1) for r in sub])
        y = np.log([max(r["seconds"], 1e-9) for r in sub])
        if len(sub) > 1 and np.ptp(x) > 0:
            slope = float(np.polyfit(x, y, 1)[0])
            click.echo(f"{backend}: fitted scaling exponent {slope:.2f} "
                       f"over {len(sub)} runs")


cli.add_command(bench_cmd, name="bench")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 130
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except MctdError as exc:
        click.echo(f"error: {exc}", err=True)
        for klass, code in _EXIT_CODES.items():
            if isinstance(exc, klass):
                return code
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
