"""The seven benchmark Markov chains, their closed-form transition densities,
and the Monte-Carlo risk experiment runner.

Chains 1-4 are run through a long burn-in (10^4 steps) so the retained path is
approximately stationary; chains 5-7 start at X_0 = 1/2 with no burn-in.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import betaln

from .errors import IOFailure, ValidationError
from .loss import QuadSpec, TruthTables, build_truth_tables
from .select import oracle_select, partition_risk, select
from .stats import Sample, StatsPyramid, bin_sample

EXAMPLES = (1, 2, 3, 4, 5, 6, 7)
DEFAULT_BURN_IN = 10_000

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_B44 = float(betaln(4, 4))
_LOG_B400 = float(betaln(400, 400))


def _beta_pdf(z, a_log_b: float, shape_minus_1: float):
    """Beta(a, a) density with precomputed log-beta constant; 0 outside (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    inside = (z > 0.0) & (z < 1.0)
    zc = np.where(inside, z, 0.5)
    out = np.exp(shape_minus_1 * (np.log(zc) + np.log1p(-zc)) - a_log_b)
    return np.where(inside, out, 0.0)


def _sigma3(x):
    """Conditional standard deviation of chain 3 (beta-density mixture dip)."""
    mix = 0.5 * _beta_pdf(5.0 * np.asarray(x) / 3.0, _LOG_B44, 3.0) \
        + 0.05 * _beta_pdf((5.0 * np.asarray(x) - 2.0) / 3.0, _LOG_B400, 399.0)
    return 1.0 / 9.0 - mix / 23.0


def _bumps4(x):
    """Two-bump drift of chain 4."""
    c = 9.0 * math.sqrt(2.0) / (4.0 * math.sqrt(math.pi))
    x = np.asarray(x, dtype=np.float64)
    return c * (np.exp(-18.0 * (x - 0.5) ** 2) + np.exp(-162.0 * (x - 0.75) ** 2))


def _bimodal6(u):
    """Noise density of chain 6: equal mixture of N(0, 0.1) and N(1, 0.1)."""
    c = 5.0 * math.sqrt(2.0) / (2.0 * math.sqrt(math.pi))
    u = np.asarray(u, dtype=np.float64)
    return c * (np.exp(-50.0 * (u - 1.0) ** 2) + np.exp(-50.0 * u ** 2))


@dataclass(frozen=True)
class ChainSpec:
    """Update map, noise sampler and start recipe of one benchmark chain."""

    example: int
    burn_in: int
    x0: float
    step: Callable[[float, float], float] = field(repr=False)
    draw_noise: Callable[[np.random.Generator, int], np.ndarray] = field(repr=False)


def _gauss(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size)


def chain_spec(example: int, burn_in: Optional[int] = None) -> ChainSpec:
    if example not in EXAMPLES:
        raise ValidationError(f"unknown example {example}; valid ids are 1..7")
    if example == 1:
        spec = ChainSpec(1, DEFAULT_BURN_IN, 0.5,
                         lambda x, u: 0.5 * x + (1.0 + u) / 4.0, _gauss)
    elif example == 2:
        spec = ChainSpec(
            2, DEFAULT_BURN_IN, 0.5,
            lambda x, u: (6.0 + math.sin(12.0 * x - 6.0)
                          + (math.cos(x - 6.0) + 3.0) * u) / 12.0,
            _gauss,
        )
    elif example == 3:
        spec = ChainSpec(
            3, DEFAULT_BURN_IN, 0.5,
            lambda x, u: (x + 1.0) / 3.0 + float(_sigma3(x)) * u,
            _gauss,
        )
    elif example == 4:
        spec = ChainSpec(
            4, DEFAULT_BURN_IN, 0.5,
            lambda x, u: (float(_bumps4(x)) + 1.0) / 4.0 + u / 8.0,
            _gauss,
        )
    elif example == 5:
        spec = ChainSpec(
            5, 0, 0.5,
            lambda x, u: 0.5 * x + (1.0 + u) / 4.0,
            lambda rng, size: rng.standard_normal(size) * math.sqrt(0.5),
        )
    elif example == 6:
        def draw6(rng, size):
            comp = rng.integers(0, 2, size=size)
            return comp + 0.1 * rng.standard_normal(size)

        spec = ChainSpec(6, 0, 0.5, lambda x, u: 0.5 * (x + u), draw6)
    else:
        spec = ChainSpec(
            7, 0, 0.5,
            lambda x, u: x / (50.0 * x + 1.0) + x * u,
            lambda rng, size: rng.exponential(size=size),
        )
    if burn_in is not None:
        spec = replace(spec, burn_in=burn_in)
    return spec


def simulate(example: int, n: int, seed, burn_in: Optional[int] = None) -> Sample:
    """Generate X_0..X_n (after any burn-in); deterministic given the seed."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    spec = chain_spec(example, burn_in)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    total = spec.burn_in + n
    noise = spec.draw_noise(rng, total)
    path = np.empty(total + 1)
    x = spec.x0
    path[0] = x
    step = spec.step
    for k in range(total):
        x = step(x, float(noise[k]))
        path[k + 1] = x
    return Sample(path[spec.burn_in:])


# ---------------------------------------------------------------------------
# Closed-form transition densities.
# ---------------------------------------------------------------------------

class GaussianTransition:
    """s(x, y) = Gaussian pdf in y with x-dependent mean and spread."""

    def __init__(self, mean: Callable, sd: Callable):
        self._mean = mean
        self._sd = sd

    def pdf(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        m = self._mean(x)
        sd = self._sd(x)
        z = (y - m) / sd
        return np.exp(-0.5 * z * z) / (sd * _SQRT_2PI)


class MixtureTransition6:
    """s(x, y) = 2 f(2y - x), f the bimodal noise density of chain 6."""

    def pdf(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return 2.0 * _bimodal6(2.0 * y - x)


class ExponentialTransition7:
    """s(x, y) = (1/x) exp(-(y - c(x)) / x) for y >= c(x), c(x) = x / (50x + 1).

    Defined as 0 at x <= 0; the chain started at 1/2 with positive updates
    never reaches 0. Unbounded as x approaches 0 from above.
    """

    @staticmethod
    def shift(x: float) -> float:
        return x / (50.0 * x + 1.0)

    def pdf(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        pos = x > 0.0
        xc = np.where(pos, x, 1.0)
        c = xc / (50.0 * xc + 1.0)
        above = y >= c
        z = np.where(above, (y - c) / xc, 0.0)
        return np.where(pos & above, np.exp(-z) / xc, 0.0)

    def y_breakpoint(self, x: float) -> Optional[float]:
        # Jump of s(x, .) at the lower support edge.
        return self.shift(x) if x > 0.0 else None


def true_density(example: int):
    """The closed-form transition density of a benchmark chain."""
    if example == 1:
        return GaussianTransition(lambda x: 0.5 * x + 0.25,
                                  lambda x: np.full_like(np.asarray(x, float), 0.25))
    if example == 2:
        return GaussianTransition(lambda x: (6.0 + np.sin(12.0 * x - 6.0)) / 12.0,
                                  lambda x: (np.cos(x - 6.0) + 3.0) / 12.0)
    if example == 3:
        return GaussianTransition(lambda x: (x + 1.0) / 3.0, _sigma3)
    if example == 4:
        return GaussianTransition(lambda x: (_bumps4(x) + 1.0) / 4.0,
                                  lambda x: np.full_like(np.asarray(x, float), 0.125))
    if example == 5:
        return GaussianTransition(lambda x: 0.5 * x + 0.25,
                                  lambda x: np.full_like(np.asarray(x, float),
                                                         0.25 * math.sqrt(0.5)))
    if example == 6:
        return MixtureTransition6()
    if example == 7:
        return ExponentialTransition7()
    raise ValidationError(f"unknown example {example}; valid ids are 1..7")


# ---------------------------------------------------------------------------
# Monte-Carlo experiment runner.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    example: int
    n: int = 1000
    levels: tuple[int, ...] = (7,)
    L: float = 0.03
    replicates: int = 100
    base_seed: int = 0
    quad: QuadSpec = QuadSpec()
    with_oracle: bool = False
    oracle_level: Optional[int] = None  # defaults to max(levels)
    compute_l2: bool = True
    burn_in: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ValidationError(f"unknown example {self.example}; valid ids are 1..7")
        if self.replicates < 1 or self.n < 4 or not self.levels:
            raise ValidationError("need replicates >= 1, n > 3 and at least one level")
        if any(l < 1 for l in self.levels):
            raise ValidationError("levels must be >= 1")


@dataclass(frozen=True)
class RiskRow:
    example: int
    ell: int
    L: float
    n: int
    replicate: int
    seed: int
    h2_risk: float
    l2_risk: Optional[float]
    oracle_h2: Optional[float]
    ratio: Optional[float]


RISK_FIELDS = ("example", "ell", "L", "n", "replicate", "seed",
               "h2_risk", "l2_risk", "oracle_h2", "ratio")


@dataclass
class RiskReport:
    rows: list[RiskRow]

    def summary(self) -> list[dict]:
        groups: dict[tuple[int, int], list[RiskRow]] = {}
        for row in self.rows:
            groups.setdefault((row.example, row.ell), []).append(row)
        out = []
        for (example, ell), rows in sorted(groups.items()):
            rec = {
                "example": example,
                "ell": ell,
                "L": rows[0].L,
                "n": rows[0].n,
                "replicates": len(rows),
                "mean_h2": float(np.mean([r.h2_risk for r in rows])),
                "std_h2": float(np.std([r.h2_risk for r in rows])),
            }
            l2 = [r.l2_risk for r in rows if r.l2_risk is not None]
            rec["mean_l2"] = float(np.mean(l2)) if l2 else None
            oracle = [r.oracle_h2 for r in rows if r.oracle_h2 is not None]
            rec["mean_oracle_h2"] = float(np.mean(oracle)) if oracle else None
            ratios = [r.ratio for r in rows if r.ratio is not None]
            if ratios:
                for q in (0.5, 0.75, 0.9, 0.95):
                    rec[f"ratio_q{int(q * 100)}"] = float(np.quantile(ratios, q))
            out.append(rec)
        return out

    def write_csv(self, path) -> None:
        try:
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(RISK_FIELDS)
                for row in self.rows:
                    writer.writerow([getattr(row, f) for f in RISK_FIELDS])
        except OSError as exc:
            raise IOFailure(f"cannot write risk CSV {path}: {exc}") from exc
        summary_path = _summary_path(path)
        summary = self.summary()
        try:
            with open(summary_path, "w", newline="") as fh:
                if summary:
                    writer = csv.DictWriter(fh, fieldnames=list(summary[0]))
                    writer.writeheader()
                    writer.writerows(summary)
        except OSError as exc:
            raise IOFailure(f"cannot write summary CSV {summary_path}: {exc}") from exc


def _summary_path(path) -> str:
    path = str(path)
    stem, dot, ext = path.rpartition(".")
    return f"{stem}_summary.{ext}" if dot else f"{path}_summary"


def read_risk_csv(path) -> RiskReport:
    rows = []
    try:
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(RiskRow(
                    example=int(rec["example"]), ell=int(rec["ell"]),
                    L=float(rec["L"]), n=int(rec["n"]),
                    replicate=int(rec["replicate"]), seed=int(rec["seed"]),
                    h2_risk=float(rec["h2_risk"]),
                    l2_risk=float(rec["l2_risk"]) if rec["l2_risk"] else None,
                    oracle_h2=float(rec["oracle_h2"]) if rec["oracle_h2"] else None,
                    ratio=float(rec["ratio"]) if rec["ratio"] else None,
                ))
    except OSError as exc:
        raise IOFailure(f"cannot read risk CSV {path}: {exc}") from exc
    return RiskReport(rows)


def _truncate_pyramid(pyramid: StatsPyramid, level: int) -> StatsPyramid:
    if level >= pyramid.max_level:
        return pyramid
    return StatsPyramid(level, pyramid.d, pyramid.n,
                        pyramid.transitions[: level + 1],
                        pyramid.occupancy[: level + 1])


def _truncate_tables(tables: TruthTables, level: int) -> TruthTables:
    if level >= tables.max_level:
        return tables
    return TruthTables(
        level, tables.n,
        tables.int_s[: level + 1], tables.int_sqrt[: level + 1],
        tables.int_sq[: level + 1] if tables.int_sq is not None else None,
        tables.counts[: level + 1],
    )


def run_replicate(cfg: ExperimentConfig, replicate: int) -> list[RiskRow]:
    """All rows of one replicate; deterministic given (base_seed, replicate)."""
    truth = true_density(cfg.example)
    sample = simulate(cfg.example, cfg.n, [cfg.base_seed, replicate],
                      burn_in=cfg.burn_in)
    oracle_level = cfg.oracle_level if cfg.oracle_level is not None else max(cfg.levels)
    max_level = max(max(cfg.levels), oracle_level if cfg.with_oracle else 0)
    pyramid = bin_sample(sample, max_level)
    tables = build_truth_tables(truth, sample, max_level, cfg.quad,
                                want_square=cfg.compute_l2)

    oracle_h2 = None
    if cfg.with_oracle:
        oracle = oracle_select(truth, sample, oracle_level, cfg.quad,
                               pyramid=_truncate_pyramid(pyramid, oracle_level),
                               tables=_truncate_tables(tables, oracle_level))
        oracle_h2 = oracle.objective

    rows = []
    for ell in cfg.levels:
        result = select(sample, cfg.L, ell,
                        pyramid=_truncate_pyramid(pyramid, ell))
        h2 = partition_risk(tables, result.estimate, "hellinger")
        l2 = partition_risk(tables, result.estimate, "quadratic") if cfg.compute_l2 else None
        ratio = h2 / oracle_h2 if oracle_h2 else None
        rows.append(RiskRow(
            example=cfg.example, ell=ell, L=cfg.L, n=cfg.n,
            replicate=replicate, seed=cfg.base_seed,
            h2_risk=h2, l2_risk=l2, oracle_h2=oracle_h2, ratio=ratio,
        ))
    return rows


def run_experiment(cfg: ExperimentConfig,
                   progress: Optional[Callable[[int], None]] = None) -> RiskReport:
    """Simulate, select and score every replicate; rows sorted by replicate."""
    rows: list[RiskRow] = []
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for i, chunk in enumerate(
                pool.map(run_replicate, [cfg] * cfg.replicates, range(cfg.replicates))
            ):
                rows.extend(chunk)
                if progress:
                    progress(i + 1)
    else:
        for replicate in range(cfg.replicates):
            rows.extend(run_replicate(cfg, replicate))
            if progress:
                progress(replicate + 1)
    rows.sort(key=lambda r: (r.replicate, r.ell))
    return RiskReport(rows)
