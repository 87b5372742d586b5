"""Penalized selection over recursive dyadic partitions.

Pipeline: bin the chain, compute SUP_K (the inner maximization against all
rival partitions) for every cube via the kernel backend, then minimize the
additive criterion  gamma(m) = sum_K (SUP_K + 2w)  over all partitions with
the outer dynamic program. Ties prefer the coarser option. Also provides a
literal brute-force evaluation of gamma for small instances, the true-risk
oracle selector, and the finite-dictionary selector.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import backend as _backend
from .errors import CapacityError, ValidationError
from .loss import (
    PenaltyConfig,
    QuadSpec,
    TruthTables,
    build_truth_tables,
    hellinger_cost_arrays,
    score_pair,
)
from .partition import (
    DyadicCube,
    Partition,
    PartitionTree,
    enumerate_partitions,
    intersect,
)
from .stats import HistogramEstimate, Sample, StatsPyramid, bin_sample, _pool

log = logging.getLogger(__name__)


@dataclass
class SelectionResult:
    """Outcome of a minimization over the partition family."""

    partition: Partition
    objective: float  # gamma(m) for the penalized rule, the risk for the oracle
    estimate: HistogramEstimate
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "partition": json.loads(self.partition.to_json()),
                "objective": self.objective,
                "values": [
                    {"j": c.level, "l": list(c.indices), "value": self.estimate.values[c]}
                    for c in self.partition
                ],
                "config": self.config,
                "diagnostics": self.diagnostics,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SelectionResult":
        obj = json.loads(text)
        partition = Partition.from_json(json.dumps(obj["partition"]))
        values = {
            DyadicCube(int(v["j"]), tuple(v["l"])): float(v["value"])
            for v in obj["values"]
        }
        return cls(
            partition=partition,
            objective=float(obj["objective"]),
            estimate=HistogramEstimate(partition, values),
            config=obj.get("config", {}),
            diagnostics=obj.get("diagnostics", {}),
        )


def _dense_arrays(pyramid: StatsPyramid):
    values = [np.ascontiguousarray(v) for v in pyramid.cell_values()]
    masses = [np.ascontiguousarray(m) for m in pyramid.cell_masses()]
    counts = [np.ascontiguousarray(t.astype(np.float64)) for t in pyramid.transitions]
    return values, masses, counts


def _extract_partition(split: list[np.ndarray], dim: int) -> Partition:
    max_level = len(split) - 1
    cells: list[DyadicCube] = []

    def walk(cube: DyadicCube):
        j = cube.level
        if j == max_level or not split[j][cube.flat_index()]:
            cells.append(cube)
            return
        for child in cube.children():
            walk(child)

    walk(DyadicCube.root(dim))
    return Partition(cells)


def clamp_level(level: int, n: int) -> int:
    """Depth caps beyond n are redundant; clamp with a notice."""
    if level > n:
        log.info("depth cap %d exceeds the transition count %d; clamped to %d",
                 level, n, n)
        return n
    return level


def select(sample: Sample, L: float, level: int, *,
           backend: Optional[str] = None,
           pyramid: Optional[StatsPyramid] = None) -> SelectionResult:
    """Exact minimizer of the penalized criterion over partitions of depth <= level."""
    if level < 1:
        raise ValidationError("level must be >= 1")
    level = clamp_level(level, sample.n)
    config = PenaltyConfig(L=L, level=level, n=sample.n)
    dim = 2 * sample.d

    t0 = time.perf_counter()
    if pyramid is None or pyramid.max_level < level:
        pyramid = bin_sample(sample, level)
    bin_visits = (sample.n + 1) * sample.d + sum(
        arr.size for arr in pyramid.transitions
    )

    values, masses, counts = _dense_arrays(pyramid)
    kernel, backend_name = _backend.get_sup_kernel(backend, dim)
    sup, inner_visits = kernel(values, masses, counts, pyramid.n,
                               config.leaf_weight, dim)
    leaf_costs = [s + 2.0 * config.leaf_weight for s in sup]
    gamma_min, split, outer_visits = _outer_min(leaf_costs, dim)
    partition = _extract_partition(split, dim)
    est = HistogramEstimate(
        partition, {c: float(values[c.level][c.flat_index()]) for c in partition}
    )
    elapsed = time.perf_counter() - t0
    return SelectionResult(
        partition=partition,
        objective=gamma_min,
        estimate=est,
        config={"L": L, "level": level, "n": sample.n, "d": sample.d},
        diagnostics={
            "backend": backend_name,
            "cube_visits": int(bin_visits + inner_visits + outer_visits),
            "bin_visits": int(bin_visits),
            "inner_visits": int(inner_visits),
            "elapsed_s": elapsed,
        },
    )


def _outer_min(leaf_costs: list[np.ndarray], dim: int):
    from ._dp_numpy import outer_min

    return outer_min(leaf_costs, dim)


# ---------------------------------------------------------------------------
# Per-cube inner maximization with the rival partition, recursion form.
# ---------------------------------------------------------------------------

def inner_dp(K: DyadicCube, pyramid: StatsPyramid,
             config: PenaltyConfig) -> tuple[float, Partition]:
    """SUP_K and a maximizing rival partition, by direct tree recursion.

    Rivals disjoint from K score 0 and are kept as leaves; only the subtree of
    K and the ancestor chain are explored.
    """
    if K.level > config.level:
        raise ValidationError("cube is deeper than the depth cap")
    w = config.leaf_weight

    def best_subtree(S: DyadicCube) -> tuple[float, PartitionTree]:
        leaf_score = score_pair(K, S, pyramid, config) - w
        if S.level >= config.level:
            return leaf_score, PartitionTree(S)
        parts = [best_subtree(c) for c in S.children()]
        total = sum(v for v, _ in parts)
        if leaf_score >= total:
            return leaf_score, PartitionTree(S)
        return total, PartitionTree(S, tuple(t for _, t in parts))

    best, best_tree = best_subtree(K)
    best_leaf_level: Optional[int] = None  # set when an ancestor leaf wins
    for t in range(K.level):
        cand = score_pair(K, K.ancestor(t), pyramid, config) - w
        if cand > best:
            best = cand
            best_leaf_level = t

    if best_leaf_level is not None:
        tree = _chain_tree(K.ancestor(best_leaf_level), None)
    else:
        tree = _chain_tree(K, best_tree)
    return best, Partition(tuple(tree.leaves()), _tree=tree)


def _chain_tree(target: DyadicCube, subtree: Optional[PartitionTree]) -> PartitionTree:
    """Split from the root down to `target`, leaves elsewhere; attach `subtree` there."""

    def build(cube: DyadicCube) -> PartitionTree:
        if cube == target:
            return subtree if subtree is not None else PartitionTree(cube)
        if not cube.contains_cube(target):
            return PartitionTree(cube)
        return PartitionTree(cube, tuple(build(c) for c in cube.children()))

    return build(DyadicCube.root(target.dim))


# ---------------------------------------------------------------------------
# Literal brute-force gamma for small instances.
# ---------------------------------------------------------------------------

_DIRECT_ENUM_LEVEL = 2
_DIRECT_DP_LEVEL = 3


def gamma_direct(m: Partition, pyramid: StatsPyramid, config: PenaltyConfig,
                 rivals: Optional[Sequence[Partition]] = None) -> float:
    """gamma(m) evaluated literally from its definition.

    The inner supremum enumerates every rival partition for depth caps <= 2
    (optionally from a precomputed list) and falls back to the recursion form
    at depth 3; larger instances are rejected.
    """
    if pyramid.d != 1:
        raise CapacityError("brute-force gamma supports d = 1 only")
    if config.level > _DIRECT_DP_LEVEL:
        raise CapacityError(f"brute-force gamma capped at depth {_DIRECT_DP_LEVEL}")
    w = config.leaf_weight
    use_enum = config.level <= _DIRECT_ENUM_LEVEL
    if use_enum and rivals is None:
        rivals = list(enumerate_partitions(config.level, pyramid.d))

    total = 0.0
    for K in m:
        if use_enum:
            sup = -math.inf
            for mp in rivals:
                acc = 0.0
                meets = 0
                for Kp in mp:
                    if intersect(K, Kp) is None:
                        continue
                    meets += 1
                    acc += score_pair(K, Kp, pyramid, config)
                sup = max(sup, acc - w * meets)
        else:
            sup, _ = inner_dp(K, pyramid, config)
        total += sup
    return total + 2.0 * w * len(m)


# ---------------------------------------------------------------------------
# True-risk oracle selector.
# ---------------------------------------------------------------------------

def oracle_select(truth, sample: Sample, level: int,
                  spec: QuadSpec = QuadSpec(),
                  pyramid: Optional[StatsPyramid] = None,
                  tables: Optional[TruthTables] = None) -> SelectionResult:
    """Minimizer of the true Hellinger risk over partitions of depth <= level.

    Computable only when the transition density is known; exploits additivity
    of the risk over cells with the same outer dynamic program.
    """
    if sample.d != 1:
        raise ValidationError("oracle selection supports d = 1 only")
    if level < 1:
        raise ValidationError("level must be >= 1")
    t0 = time.perf_counter()
    if pyramid is None or pyramid.max_level < level:
        pyramid = bin_sample(sample, level)
    if tables is None or tables.max_level < level:
        tables = build_truth_tables(truth, sample, level, spec)
    values = pyramid.cell_values()
    inv2n = 1.0 / (2.0 * sample.n)
    costs = [arr * inv2n for arr in hellinger_cost_arrays(tables, values)]
    risk, split, visits = _outer_min(costs, 2)
    partition = _extract_partition(split, 2)
    est = HistogramEstimate(
        partition, {c: float(values[c.level][c.flat_index()]) for c in partition}
    )
    return SelectionResult(
        partition=partition,
        objective=risk,
        estimate=est,
        config={"level": level, "n": sample.n, "kind": "oracle"},
        diagnostics={"cube_visits": int(visits),
                     "elapsed_s": time.perf_counter() - t0},
    )


def partition_risk(tables: TruthTables, est: HistogramEstimate,
                   cost_kind: str = "hellinger") -> float:
    """Risk of a given estimate from precomputed truth tables.

    Uses the same per-cube costs and pooling as the oracle minimization, so
    the oracle value never exceeds this one, replicate by replicate.
    """
    from .loss import _estimate_value_arrays, _partition_cost, quadratic_cost_arrays

    values = _estimate_value_arrays(est, tables.max_level)
    if cost_kind == "hellinger":
        costs = [arr / (2.0 * tables.n) for arr in hellinger_cost_arrays(tables, values)]
    elif cost_kind == "quadratic":
        costs = [arr / tables.n for arr in quadratic_cost_arrays(tables, values)]
    else:
        raise ValidationError(f"unknown cost kind {cost_kind!r}")
    return _partition_cost(costs, est)


# ---------------------------------------------------------------------------
# Finite-dictionary selector.
# ---------------------------------------------------------------------------

class Dictionary:
    """A finite weighted set of candidate densities on a common dyadic grid.

    Candidates are dense value arrays at the grid level (flat, source axis
    most significant); weights delta >= 1 with sum(exp(-delta)) <= 1.
    """

    def __init__(self, grid_level: int, candidates: Sequence[np.ndarray],
                 deltas: Sequence[float]):
        if grid_level < 0:
            raise ValidationError("grid level must be >= 0")
        if len(candidates) == 0 or len(candidates) != len(deltas):
            raise ValidationError("need one weight per candidate")
        size = 1 << (2 * grid_level)
        arrs = []
        for cand in candidates:
            arr = np.asarray(cand, dtype=np.float64).reshape(-1)
            if arr.size != size:
                raise ValidationError(
                    f"candidate has {arr.size} cells, grid level {grid_level} needs {size}"
                )
            if np.any(arr < 0.0):
                raise ValidationError("candidate values must be nonnegative")
            arrs.append(arr)
        deltas = np.asarray(deltas, dtype=np.float64)
        if np.any(deltas < 1.0):
            raise ValidationError("weights must be >= 1")
        if float(np.exp(-deltas).sum()) > 1.0 + 1e-12:
            raise ValidationError("sum(exp(-delta)) exceeds 1")
        self.grid_level = grid_level
        self.candidates = arrs
        self.deltas = deltas

    def __len__(self) -> int:
        return len(self.candidates)


def dictionary_select(dictionary: Dictionary, sample: Sample, L: float,
                      pyramid: Optional[StatsPyramid] = None) -> tuple[int, np.ndarray]:
    """Argmin of the penalized sup-score over the dictionary; lowest index on ties.

    Returns (chosen index, per-candidate scores).
    """
    if L <= 0.0:
        raise ValidationError("L must be positive")
    g = dictionary.grid_level
    if pyramid is None or pyramid.max_level < g:
        pyramid = bin_sample(sample, g)
    n = pyramid.n
    mass = pyramid.cell_masses()[g]
    count = pyramid.transitions[g].astype(np.float64)

    from .loss import pair_score_arrays

    size = len(dictionary)
    pair = np.empty((size, size))
    for i, a in enumerate(dictionary.candidates):
        for k, b in enumerate(dictionary.candidates):
            pair[i, k] = float(np.sum(pair_score_arrays(a, b, mass, count, n)))
    penal = L * dictionary.deltas / n
    scores = np.max(pair - penal[None, :], axis=1) + penal
    return int(np.argmin(scores)), scores
