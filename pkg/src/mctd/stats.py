"""Sufficient statistics of an observed chain on the dyadic pyramid.

For each level j the pyramid holds the transition counts per cube (dense
array of 4^(jd) int64) and the occupancy counts per source interval cube
(dense array of 2^(jd) int64). The deepest level is filled by direct
binning; coarser levels are aggregated, so counts are exact at every level.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import IOFailure, ValidationError
from .partition import DyadicCube, Partition


@dataclass(frozen=True)
class Sample:
    """An observed path X_0..X_n of d-vectors; n transitions."""

    points: np.ndarray  # shape (n+1, d)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValidationError("a sample needs at least two points (one transition)")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def in_square_fraction(self) -> float:
        """Fraction of transitions (X_i, X_{i+1}) lying inside [0,1]^(2d)."""
        ok = np.all((self.points >= 0.0) & (self.points <= 1.0), axis=1)
        return float(np.mean(ok[:-1] & ok[1:]))


def _coordinate_indices(points: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based per-axis interval indices at the given level, plus an in-[0,1] mask.

    A coordinate exactly equal to 1 lands in the last interval.
    """
    side = 1 << level
    inside = np.all((points >= 0.0) & (points <= 1.0), axis=1)
    idx = np.minimum((points * side).astype(np.int64), side - 1)
    idx[~inside] = 0
    return idx, inside


def _flatten(idx: np.ndarray, level: int) -> np.ndarray:
    """Mixed-radix flat index over axes, axis 0 most significant."""
    side = 1 << level
    flat = np.zeros(idx.shape[0], dtype=np.int64)
    for k in range(idx.shape[1]):
        flat = flat * side + idx[:, k]
    return flat


def _pool(arr: np.ndarray, level: int, dim: int) -> np.ndarray:
    """Aggregate a dense level-(j+1) array to level j by summing 2^dim children."""
    shape = []
    for _ in range(dim):
        shape.extend((1 << level, 2))
    pooled = arr.reshape(shape).sum(axis=tuple(range(1, 2 * dim, 2)))
    return pooled.reshape(-1)


class StatsPyramid:
    """Per-level transition and occupancy counts; immutable after construction."""

    __slots__ = ("max_level", "d", "n", "transitions", "occupancy")

    def __init__(self, max_level: int, d: int, n: int,
                 transitions: Sequence[np.ndarray], occupancy: Sequence[np.ndarray]):
        self.max_level = max_level
        self.d = d
        self.n = n
        self.transitions = tuple(transitions)
        self.occupancy = tuple(occupancy)
        for arr in self.transitions + self.occupancy:
            arr.setflags(write=False)

    def transition_count(self, cube: DyadicCube) -> int:
        """N_K: number of i with (X_i, X_{i+1}) in K."""
        self._check(cube)
        return int(self.transitions[cube.level][cube.flat_index()])

    def occupancy_count(self, cube: DyadicCube) -> int:
        """P over the source projection I_K: number of i <= n-1 with X_i in I_K."""
        self._check(cube)
        side = 1 << (cube.level * self.d)
        return int(self.occupancy[cube.level][cube.flat_index() // side])

    def occupancy_mass(self, cube: DyadicCube) -> float:
        """The denominator mass P_{I_K} * mu(J_K)."""
        return self.occupancy_count(cube) * cube.target_measure

    def _check(self, cube: DyadicCube) -> None:
        if cube.dim != 2 * self.d:
            raise ValidationError("cube dimension does not match the pyramid")
        if cube.level > self.max_level:
            raise ValidationError(
                f"cube level {cube.level} deeper than pyramid level {self.max_level}"
            )

    def cell_values(self) -> list[np.ndarray]:
        """Per level: dense array of histogram constants N_K / (P_{I_K} mu(J_K)), 0/0 = 0."""
        out = []
        for j in range(self.max_level + 1):
            mu_j = 2.0 ** (-j * self.d)
            denom = np.repeat(self.occupancy[j].astype(np.float64), 1 << (j * self.d)) * mu_j
            with np.errstate(invalid="ignore", divide="ignore"):
                vals = np.where(denom > 0.0, self.transitions[j] / denom, 0.0)
            out.append(vals)
        return out

    def cell_masses(self) -> list[np.ndarray]:
        """Per level: dense array of occupancy masses P_{I_K} mu(J_K)."""
        out = []
        for j in range(self.max_level + 1):
            mu_j = 2.0 ** (-j * self.d)
            out.append(np.repeat(self.occupancy[j].astype(np.float64), 1 << (j * self.d)) * mu_j)
        return out


def bin_sample(sample: Sample, max_level: int) -> StatsPyramid:
    """Bin the chain at the deepest level, then aggregate the pyramid upward.

    Points outside [0,1]^d are counted in no cell.
    """
    if max_level < 0:
        raise ValidationError("max_level must be >= 0")
    d = sample.d
    dim = 2 * d
    n = sample.n
    idx, inside = _coordinate_indices(sample.points, max_level)
    row = _flatten(idx, max_level)  # flat source index per time step

    src_ok = inside[:-1]
    pair_ok = inside[:-1] & inside[1:]
    side_d = 1 << (max_level * d)
    pair_flat = row[:-1] * side_d + row[1:]

    transitions = [None] * (max_level + 1)
    occupancy = [None] * (max_level + 1)
    transitions[max_level] = np.bincount(
        pair_flat[pair_ok], minlength=side_d * side_d
    ).astype(np.int64)
    occupancy[max_level] = np.bincount(
        row[:-1][src_ok], minlength=side_d
    ).astype(np.int64)
    for j in range(max_level - 1, -1, -1):
        transitions[j] = _pool(transitions[j + 1], j, dim)
        occupancy[j] = _pool(occupancy[j + 1], j, d)
    return StatsPyramid(max_level, d, n, transitions, occupancy)


def cell_value(cube: DyadicCube, pyramid: StatsPyramid) -> float:
    """The histogram constant N_K / (P_{I_K} mu(J_K)); 0 when the column is empty."""
    mass = pyramid.occupancy_mass(cube)
    if mass == 0.0:
        return 0.0
    return pyramid.transition_count(cube) / mass


class HistogramEstimate:
    """A partition plus one nonnegative constant per cell."""

    __slots__ = ("partition", "values")

    def __init__(self, partition: Partition, values: dict[DyadicCube, float]):
        if set(values) != set(partition.cells):
            raise ValidationError("values must be keyed exactly by the partition cells")
        for v in values.values():
            if v < 0.0:
                raise ValidationError("cell values must be nonnegative")
        self.partition = partition
        self.values = dict(values)

    def __call__(self, x, y) -> float:
        return evaluate(self, x, y)


def estimate(partition: Partition, pyramid: StatsPyramid) -> HistogramEstimate:
    if partition.max_level > pyramid.max_level:
        raise ValidationError("partition is deeper than the binned pyramid")
    return HistogramEstimate(
        partition, {cube: cell_value(cube, pyramid) for cube in partition}
    )


def evaluate(est: HistogramEstimate, x, y) -> float:
    """Value at (x, y); zero outside [0,1]^(2d)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    cell = est.partition.locate(tuple(x) + tuple(y))
    if cell is None:
        return 0.0
    return est.values[cell]


def evaluate_grid(est: HistogramEstimate, resolution: int = 256) -> np.ndarray:
    """Dense evaluation on a resolution x resolution midpoint grid (d = 1 only)."""
    if est.partition.dim != 2:
        raise ValidationError("grid evaluation supports d = 1 only")
    level = est.partition.max_level
    side = 1 << level
    dense = np.empty((side, side))
    for cube, val in est.values.items():
        shift = level - cube.level
        x0 = (cube.indices[0] - 1) << shift
        y0 = (cube.indices[1] - 1) << shift
        dense[x0:x0 + (1 << shift), y0:y0 + (1 << shift)] = val
    # Nearest-cell lookup of grid midpoints against the dyadic cells.
    mids = (np.arange(resolution) + 0.5) / resolution
    xi = np.minimum((mids * side).astype(np.int64), side - 1)
    return dense[np.ix_(xi, xi)]


def read_sample_csv(path) -> Sample:
    """Headerless CSV, one coordinate row per time step."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), start=1):
                if not rec:
                    continue
                try:
                    rows.append([float(v) for v in rec])
                except ValueError as exc:
                    raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise IOFailure(f"cannot read sample CSV {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: empty sample file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: inconsistent column counts {sorted(widths)}")
    return Sample(np.asarray(rows, dtype=np.float64))


def write_sample_csv(path, sample: Sample) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in sample.points:
                writer.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise IOFailure(f"cannot write sample CSV {path}: {exc}") from exc
