"""Numpy kernels for the per-cube inner maximization.

For every cube K up to the depth cap, computes
    SUP_K = sup over rival partitions of [ sum of pair scores - w * (number of
            rival cells meeting K) ]
by the bottom-up tree recursion. Cubes disjoint from K contribute 0 and are
never visited: rivals are either descendants of K (full subtree recursion) or
ancestors (a plain running maximum along the chain, since the siblings off the
chain contribute 0).

Works for any dimension count D = 2d; arrays are dense per level, flat
mixed-radix indexed with axis 0 most significant.
"""
from __future__ import annotations

import numpy as np

from .loss import pair_score_arrays
from .stats import _pool


def _upsample(arr: np.ndarray, level: int, target: int, dim: int) -> np.ndarray:
    """Replicate a dense level array onto the deeper target level grid."""
    if target == level:
        return arr
    rep = 1 << (target - level)
    side = 1 << level
    shaped = arr.reshape((side,) * dim)
    for axis in range(dim):
        shaped = np.repeat(shaped, rep, axis=axis)
    return shaped.reshape(-1)


def sup_all(values: list[np.ndarray], masses: list[np.ndarray],
            counts: list[np.ndarray], n: int, leaf_weight: float,
            dim: int) -> tuple[list[np.ndarray], int]:
    """SUP_K for every cube of every level; also returns the visit count.

    values/masses/counts: per level, dense arrays of the cell constant, the
    occupancy mass and the transition count.
    """
    max_level = len(values) - 1
    sup = []
    visits = 0
    for j in range(max_level + 1):
        # Rivals below K (descendants, K itself): bottom-up subtree recursion
        # with leaf score F_K(S) - w, keyed by the level-j ancestor of S.
        acc = None
        for u in range(max_level, j - 1, -1):
            anc = _upsample(values[j], j, u, dim)
            leaf = pair_score_arrays(anc, values[u], masses[u], counts[u], n) - leaf_weight
            visits += leaf.size
            if acc is None:
                acc = leaf
            else:
                acc = np.maximum(leaf, _pool(acc, u, dim))
        # Rivals above K (proper ancestors): running maximum along the chain.
        best = acc
        for t in range(j):
            anc = _upsample(values[t], t, j, dim)
            cand = pair_score_arrays(values[j], anc, masses[j], counts[j], n) - leaf_weight
            visits += cand.size
            best = np.maximum(best, cand)
        sup.append(best)
    return sup, visits


def outer_min(leaf_costs: list[np.ndarray], dim: int) -> tuple[float, list[np.ndarray], int]:
    """Minimize the additive cost over all recursive-split partitions.

    Returns the minimum, per-level boolean split flags (True where splitting
    beats keeping the leaf; ties keep the coarser leaf), and the visit count.
    """
    max_level = len(leaf_costs) - 1
    split = [np.zeros(arr.shape, dtype=bool) for arr in leaf_costs]
    best = leaf_costs[max_level]
    visits = best.size
    for j in range(max_level - 1, -1, -1):
        pooled = _pool(best, j, dim)
        leaf = leaf_costs[j]
        split[j] = pooled < leaf
        best = np.where(split[j], pooled, leaf)
        visits += best.size
    return float(best[0]), split, visits
