"""Random Hellinger distance, the three-term comparison statistic, per-cube-pair
scores, and quadrature risks against a known transition density.

All cell formulas act on pairs of constants (a, b) restricted to a cube S and
use only the pyramid statistics: the occupancy mass w_S = P_{I_S} mu(J_S) and
the transition count N_S.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .partition import DyadicCube, intersect
from .stats import HistogramEstimate, Sample, StatsPyramid, _pool

SQRT2 = math.sqrt(2.0)
# Fixed mixing constant of the selection criterion.
ALPHA = (1.0 - 1.0 / SQRT2) / 2.0


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty scale L, depth cap, and transition count; w = L log(n) / n per leaf."""

    L: float
    level: int
    n: int

    def __post_init__(self):
        if self.L <= 0.0:
            raise ValidationError("L must be positive")
        if self.n <= 3:
            raise ValidationError("selection requires n > 3")
        if self.level < 0:
            raise ValidationError("level must be >= 0")

    @property
    def leaf_weight(self) -> float:
        return self.L * math.log(self.n) / self.n


@dataclass(frozen=True)
class CellPairScore:
    """Inputs of the cell formulas: constants a, b and the statistics of S."""

    a: float
    b: float
    mass: float   # w_S = P_{I_S} mu(J_S)
    count: float  # N_S

    def __post_init__(self):
        if min(self.a, self.b, self.mass, self.count) < 0.0:
            raise ValidationError("score fields must be nonnegative")


def hellinger2_cells(score: CellPairScore, n: int) -> float:
    """H^2 between the constants a and b restricted to S: (sqrt a - sqrt b)^2 w_S / (2n)."""
    return (math.sqrt(score.a) - math.sqrt(score.b)) ** 2 * score.mass / (2.0 * n)


def test_stat_cells(score: CellPairScore, n: int) -> float:
    """The three-term comparison statistic T between the constants a and b on S.

    The middle term is 0 when a + b = 0 (then the transition count is 0 too).
    """
    a, b, w, cnt = score.a, score.b, score.mass, score.count
    sa, sb = math.sqrt(a), math.sqrt(b)
    sab = math.sqrt(a + b)
    term1 = w * sab * (sb - sa) / (2.0 * n * SQRT2)
    term2 = cnt * (sb - sa) / (sab * n * SQRT2) if a + b > 0.0 else 0.0
    term3 = w * (a - b) / (2.0 * n)
    return term1 + term2 + term3


def pair_score_arrays(a, b, mass, count, n: int, alpha: float = ALPHA):
    """Vectorized alpha * H^2 + T for arrays of cell constants.

    Wherever a + b = 0 the count is necessarily 0 and the score is 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sa = np.sqrt(a)
    sb = np.sqrt(b)
    ab = a + b
    sab = np.sqrt(ab)
    diff = sb - sa
    inv2n = 1.0 / (2.0 * n)
    h2 = diff * diff * mass * inv2n
    term1 = mass * sab * diff * (inv2n / SQRT2)
    with np.errstate(invalid="ignore", divide="ignore"):
        term2 = np.where(ab > 0.0, count * diff / (sab * n * SQRT2), 0.0)
    term3 = mass * (a - b) * inv2n
    return alpha * h2 + term1 + term2 + term3


def score_pair(K: DyadicCube, Kp: DyadicCube, pyramid: StatsPyramid,
               config: PenaltyConfig) -> float:
    """Per-cube-pair score: alpha H^2 + T of the constants of K and K' on S = K n K'.

    Zero when the cubes are disjoint or identical.
    """
    from .stats import cell_value

    S = intersect(K, Kp)
    if S is None:
        return 0.0
    score = CellPairScore(
        a=cell_value(K, pyramid),
        b=cell_value(Kp, pyramid),
        mass=pyramid.occupancy_mass(S),
        count=pyramid.transition_count(S),
    )
    return ALPHA * hellinger2_cells(score, pyramid.n) + test_stat_cells(score, pyramid.n)


# ---------------------------------------------------------------------------
# Quadrature against a known transition density (d = 1).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre settings for the y-integrals."""

    order: int = 16
    max_refinements: int = 30
    abs_tol: float = 1e-9

    def __post_init__(self):
        if self.order < 1 or self.max_refinements < 0 or self.abs_tol <= 0.0:
            raise ValidationError("invalid quadrature spec")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.polynomial.legendre.leggauss(self.order)


class TruthTables:
    """Per-level pooled integrals of a known density over the dyadic grid.

    For the deepest level, A[i, J] = int_J s(X_i, y) dy and B[i, J] the same
    for sqrt(s) (C for s^2) are computed by Gauss-Legendre per cell, splitting
    a cell at a known jump location of s(X_i, .) when the density reports one.
    Coarser levels aggregate exactly by additivity, grouped by the source
    interval containing X_i.
    """

    __slots__ = ("max_level", "n", "int_s", "int_sqrt", "int_sq", "counts")

    def __init__(self, max_level, n, int_s, int_sqrt, int_sq, counts):
        self.max_level = max_level
        self.n = n
        self.int_s = int_s        # per level: (4^j,) flat [source, target]
        self.int_sqrt = int_sqrt
        self.int_sq = int_sq      # may be None
        self.counts = counts      # per level: (2^j,) design points per source interval


def _columnwise_integrals(truth, xs: np.ndarray, level: int, spec: QuadSpec,
                          want_square: bool):
    side = 1 << level
    t, w = spec.nodes()
    edges = np.arange(side + 1) / side
    half = 0.5 / side
    centers = (edges[:-1] + edges[1:]) / 2.0
    ynodes = centers[:, None] + half * t[None, :]          # (side, order)
    npts = xs.size
    A = np.empty((npts, side))
    B = np.empty((npts, side))
    C = np.empty((npts, side)) if want_square else None
    # Chunk over design points to cap the (npts, side, order) work array.
    chunk = max(1, (1 << 22) // (side * spec.order))
    for lo in range(0, npts, chunk):
        hi = min(lo + chunk, npts)
        vals = np.asarray(
            truth.pdf(xs[lo:hi, None, None], ynodes[None, :, :]), dtype=np.float64
        )
        A[lo:hi] = (vals * w).sum(axis=2) * half
        B[lo:hi] = (np.sqrt(vals) * w).sum(axis=2) * half
        if want_square:
            C[lo:hi] = (vals * vals * w).sum(axis=2) * half

    breakpoint_of = getattr(truth, "y_breakpoint", None)
    if breakpoint_of is not None:
        for i, x in enumerate(xs):
            c = breakpoint_of(float(x))
            if c is None or not 0.0 < c < 1.0:
                continue
            k = min(int(c * side), side - 1)
            lo, hi = edges[k], edges[k + 1]
            if not lo < c < hi:
                continue
            acc_a = acc_b = acc_c = 0.0
            for p, q in ((lo, c), (c, hi)):
                h2 = (q - p) / 2.0
                yy = (p + q) / 2.0 + h2 * t
                vv = np.asarray(truth.pdf(np.full_like(yy, x), yy), dtype=np.float64)
                acc_a += float((vv * w).sum() * h2)
                acc_b += float((np.sqrt(vv) * w).sum() * h2)
                if want_square:
                    acc_c += float((vv * vv * w).sum() * h2)
            A[i, k] = acc_a
            B[i, k] = acc_b
            if want_square:
                C[i, k] = acc_c
    return A, B, C


def build_truth_tables(truth, sample: Sample, max_level: int, spec: QuadSpec,
                       want_square: bool = False) -> TruthTables:
    """Integrate the known density per (design point, deepest target cell) and pool."""
    if sample.d != 1:
        raise ValidationError("quadrature risk path supports d = 1 only")
    xs = sample.points[:-1, 0]
    inside = (xs >= 0.0) & (xs <= 1.0)
    xin = xs[inside]
    side = 1 << max_level

    A, B, C = _columnwise_integrals(truth, xin, max_level, spec, want_square)
    col = np.minimum((xin * side).astype(np.int64), side - 1)

    SA = np.zeros((side, side))
    SB = np.zeros((side, side))
    np.add.at(SA, col, A)
    np.add.at(SB, col, B)
    SC = None
    if want_square:
        SC = np.zeros((side, side))
        np.add.at(SC, col, C)
    cnt = np.bincount(col, minlength=side).astype(np.float64)

    int_s = [None] * (max_level + 1)
    int_sqrt = [None] * (max_level + 1)
    int_sq = [None] * (max_level + 1) if want_square else None
    counts = [None] * (max_level + 1)
    int_s[max_level] = SA.reshape(-1)
    int_sqrt[max_level] = SB.reshape(-1)
    if want_square:
        int_sq[max_level] = SC.reshape(-1)
    counts[max_level] = cnt
    for j in range(max_level - 1, -1, -1):
        int_s[j] = _pool(int_s[j + 1], j, 2)
        int_sqrt[j] = _pool(int_sqrt[j + 1], j, 2)
        if want_square:
            int_sq[j] = _pool(int_sq[j + 1], j, 2)
        counts[j] = _pool(counts[j + 1], j, 1)
    return TruthTables(max_level, sample.n, int_s, int_sqrt, int_sq, counts)


def hellinger_cost_arrays(tables: TruthTables, values: list[np.ndarray]) -> list[np.ndarray]:
    """Per level, per cube K: sum_{i in I_K} int_{J_K} (sqrt s - sqrt a_K)^2 dy.

    Dividing the partition total by 2n gives the Hellinger risk.
    """
    out = []
    for j in range(tables.max_level + 1):
        v = values[j]
        mu_j = 2.0 ** -j
        cnt = np.repeat(tables.counts[j], 1 << j)
        out.append(tables.int_s[j] - 2.0 * np.sqrt(v) * tables.int_sqrt[j] + v * mu_j * cnt)
    return out


def quadratic_cost_arrays(tables: TruthTables, values: list[np.ndarray]) -> list[np.ndarray]:
    """Per level, per cube K: sum_{i in I_K} int_{J_K} (s - a_K)^2 dy."""
    if tables.int_sq is None:
        raise ValidationError("tables were built without squared-density integrals")
    out = []
    for j in range(tables.max_level + 1):
        v = values[j]
        mu_j = 2.0 ** -j
        cnt = np.repeat(tables.counts[j], 1 << j)
        out.append(tables.int_sq[j] - 2.0 * v * tables.int_s[j] + v * v * mu_j * cnt)
    return out


def _partition_cost(cost: list[np.ndarray], est: HistogramEstimate) -> float:
    """Sum the per-cube costs over the cells of the estimate's partition.

    Accumulates bottom-up through the dyadic tree with the same pooling as the
    minimizing dynamic program, so minimizer values dominate exactly.
    """
    max_level = len(cost) - 1
    leaf = [np.zeros(1 << (2 * j), dtype=bool) for j in range(max_level + 1)]
    for cube in est.partition:
        leaf[cube.level][cube.flat_index()] = True
    acc = np.where(leaf[max_level], cost[max_level], 0.0)
    for j in range(max_level - 1, -1, -1):
        acc = np.where(leaf[j], cost[j], _pool(acc, j, 2))
    return float(acc[0])


def hellinger2_vs_truth(truth, est: HistogramEstimate, sample: Sample,
                        spec: QuadSpec = QuadSpec(),
                        tables: Optional[TruthTables] = None) -> float:
    """(1/2n) sum_i int_0^1 (sqrt s(X_i, y) - sqrt shat(X_i, y))^2 dy.

    Design points outside [0,1] contribute 0: both the truncated density and
    the estimator vanish there.
    """
    level = est.partition.max_level
    if tables is None or tables.max_level < level:
        tables = build_truth_tables(truth, sample, level, spec)
    cost = hellinger_cost_arrays(tables, _estimate_value_arrays(est, tables.max_level))
    return _partition_cost(cost, est) / (2.0 * sample.n)


def empirical_l2(truth, est: HistogramEstimate, sample: Sample,
                 spec: QuadSpec = QuadSpec(),
                 tables: Optional[TruthTables] = None) -> float:
    """(1/n) sum_i int_0^1 (s(X_i, y) - shat(X_i, y))^2 dy."""
    level = est.partition.max_level
    if tables is None or tables.int_sq is None or tables.max_level < level:
        tables = build_truth_tables(truth, sample, level, spec, want_square=True)
    cost = quadratic_cost_arrays(tables, _estimate_value_arrays(est, tables.max_level))
    return _partition_cost(cost, est) / sample.n


def _estimate_value_arrays(est: HistogramEstimate, max_level: int) -> list[np.ndarray]:
    """Dense per-level value arrays holding the estimate's constants at their own level."""
    values = [np.zeros(1 << (2 * j)) for j in range(max_level + 1)]
    for cube, val in est.values.items():
        values[cube.level][cube.flat_index()] = val
    return values
