import math

import numpy as np
import pytest

from conftest import random_sample
from mctd.errors import CapacityError, ValidationError
from mctd.loss import PenaltyConfig, score_pair
from mctd.partition import DyadicCube, Partition, enumerate_partitions, intersect
from mctd.select import (
    Dictionary,
    SelectionResult,
    clamp_level,
    dictionary_select,
    gamma_direct,
    inner_dp,
    oracle_select,
    partition_risk,
    select,
)
from mctd.sim import simulate, true_density
from mctd.stats import Sample, bin_sample


def enumerated_sup(K, pyramid, config, rivals):
    """sup over rival partitions of (sum of scores - w per meeting cell), literally."""
    w = config.leaf_weight
    best = -math.inf
    for mp in rivals:
        acc = 0.0
        meets = 0
        for Kp in mp:
            if intersect(K, Kp) is None:
                continue
            meets += 1
            acc += score_pair(K, Kp, pyramid, config)
        best = max(best, acc - w * meets)
    return best


class TestInnerMaximization:
    def test_matches_enumeration_every_cube(self):
        sample = random_sample(17, 50)
        pyr = bin_sample(sample, 2)
        cfg = PenaltyConfig(L=0.03, level=2, n=sample.n)
        rivals = list(enumerate_partitions(2, 1))
        for j in range(3):
            for off in range(4 ** j):
                K = DyadicCube.from_flat_index(j, off, 2)
                want = enumerated_sup(K, pyr, cfg, rivals)
                got, _ = inner_dp(K, pyr, cfg)
                assert got == pytest.approx(want, rel=1e-9, abs=1e-15)

    def test_maximizer_partition_attains_the_value(self):
        sample = random_sample(23, 50)
        pyr = bin_sample(sample, 2)
        cfg = PenaltyConfig(L=0.03, level=2, n=sample.n)
        w = cfg.leaf_weight
        for off in range(4):
            K = DyadicCube.from_flat_index(1, off, 2)
            sup, rival = inner_dp(K, pyr, cfg)
            acc = 0.0
            meets = 0
            for Kp in rival:
                if intersect(K, Kp) is not None:
                    meets += 1
                    acc += score_pair(K, Kp, pyr, cfg)
            assert acc - w * meets == pytest.approx(sup, rel=1e-12, abs=1e-15)

    def test_no_data_gives_minus_w(self):
        sample = Sample(np.array([1.5, 1.7, 1.2, 1.9, 1.4]))  # all outside [0,1]
        pyr = bin_sample(sample, 2)
        cfg = PenaltyConfig(L=0.5, level=2, n=sample.n)
        sup, rival = inner_dp(DyadicCube.root(2), pyr, cfg)
        assert sup == pytest.approx(-cfg.leaf_weight, rel=1e-15)
        assert rival == Partition.trivial()

    def test_sup_nondecreasing_in_depth_cap(self):
        sample = random_sample(31, 80)
        pyr = bin_sample(sample, 3)
        K = DyadicCube(1, (1, 2))
        sups = []
        for level in (1, 2, 3):
            cfg = PenaltyConfig(L=0.03, level=level, n=sample.n)
            sups.append(inner_dp(K, pyr, cfg)[0])
        assert sups[0] <= sups[1] + 1e-15
        assert sups[1] <= sups[2] + 1e-15


class TestGammaDirect:
    def test_empty_square_trivial_partition_scores_w(self):
        sample = Sample(np.array([1.5, 1.7, 1.2, 1.9, 1.4]))
        pyr = bin_sample(sample, 2)
        cfg = PenaltyConfig(L=0.5, level=2, n=sample.n)
        w = cfg.leaf_weight
        assert gamma_direct(Partition.trivial(), pyr, cfg) == pytest.approx(w, rel=1e-15)

    def test_huge_penalty_favors_trivial_partition(self):
        sample = random_sample(5, 40)
        pyr = bin_sample(sample, 2)
        cfg = PenaltyConfig(L=40.0, level=2, n=sample.n)  # w > 3
        parts = list(enumerate_partitions(2, 1))
        vals = [gamma_direct(m, pyr, cfg, rivals=parts) for m in parts]
        best = min(range(len(parts)), key=lambda i: vals[i])
        assert parts[best] == Partition.trivial()

    def test_capacity_guard(self):
        sample = random_sample(5, 40)
        pyr = bin_sample(sample, 4)
        cfg = PenaltyConfig(L=0.03, level=4, n=sample.n)
        with pytest.raises(CapacityError):
            gamma_direct(Partition.trivial(), pyr, cfg)


class TestSelect:
    def test_huge_penalty_selects_trivial(self):
        sample = random_sample(5, 40)
        res = select(sample, 40.0, 3)
        assert res.partition == Partition.trivial()

    def test_empty_square_objective_is_w(self):
        sample = Sample(np.array([1.5, 1.7, 1.2, 1.9, 1.4]))
        res = select(sample, 0.5, 2)
        w = 0.5 * math.log(sample.n) / sample.n
        assert res.objective == pytest.approx(w, rel=1e-15)
        assert res.partition == Partition.trivial()

    def test_depth_cap_clamped_to_n(self):
        assert clamp_level(10, 4) == 4
        assert clamp_level(3, 4) == 3
        sample = Sample(np.array([0.1, 0.3, 0.6, 0.9, 0.2]))
        a = select(sample, 15.0, 5)
        b = select(sample, 15.0, 4)
        assert a.objective == b.objective
        assert a.partition == b.partition

    def test_json_roundtrip(self):
        sample = random_sample(2, 200)
        res = select(sample, 0.03, 3)
        back = SelectionResult.from_json(res.to_json())
        assert back.partition == res.partition
        assert back.objective == res.objective
        assert back.estimate.values == res.estimate.values

    def test_diagnostics_present(self):
        sample = random_sample(2, 100)
        res = select(sample, 0.03, 3)
        assert res.diagnostics["cube_visits"] > 0
        assert res.diagnostics["backend"] in ("python", "compiled")

    def test_estimate_values_match_histogram_constants(self):
        from mctd.stats import cell_value

        sample = random_sample(19, 300)
        res = select(sample, 0.03, 4)
        pyr = bin_sample(sample, 4)
        for cube, val in res.estimate.values.items():
            assert val == pytest.approx(cell_value(cube, pyr), abs=1e-15)


class TestOracle:
    def test_oracle_never_beaten_by_selected(self):
        from mctd.loss import QuadSpec, build_truth_tables

        truth = true_density(1)
        for seed in range(5):
            sample = simulate(1, 400, [100, seed])
            tables = build_truth_tables(truth, sample, 5, QuadSpec())
            oracle = oracle_select(truth, sample, 5, tables=tables)
            res = select(sample, 0.03, 5)
            risk = partition_risk(tables, res.estimate)
            assert oracle.objective <= risk + 1e-15

    def test_oracle_matches_enumeration_at_small_depth(self):
        from mctd.loss import QuadSpec, build_truth_tables, hellinger2_vs_truth

        truth = true_density(1)
        sample = simulate(1, 150, [7, 0])
        tables = build_truth_tables(truth, sample, 2, QuadSpec())
        oracle = oracle_select(truth, sample, 2, tables=tables)
        best = min(
            hellinger2_vs_truth(truth, _project(m, sample), sample, tables=tables)
            for m in enumerate_partitions(2, 1)
        )
        assert oracle.objective == pytest.approx(best, rel=1e-12)

    def test_recovers_piecewise_constant_truth(self):
        # A chain whose transition density is constant on the level-1 grid.
        rng = np.random.default_rng(42)
        grid = np.array([[1.6, 0.4], [0.2, 1.8]])
        pts = [0.3]
        for _ in range(4000):
            x = pts[-1]
            row = grid[int(x * 2), :] / 2.0
            target = rng.choice(2, p=row)
            pts.append((target + rng.random()) / 2.0)
        sample = Sample(np.array(pts))

        class GridTruth:
            def pdf(self, x, y):
                x = np.asarray(x, dtype=np.float64)
                y = np.asarray(y, dtype=np.float64)
                xi = np.clip((x * 2).astype(int), 0, 1)
                yi = np.clip((y * 2).astype(int), 0, 1)
                inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
                return np.where(inside, grid[xi, yi], 0.0)

        res = select(sample, 0.03, 4)
        from mctd.loss import hellinger2_vs_truth

        risk = hellinger2_vs_truth(GridTruth(), res.estimate, sample)
        assert risk < 0.01


def _project(partition, sample):
    from mctd.stats import estimate

    return estimate(partition, bin_sample(sample, partition.max_level))


class TestDictionary:
    def _pyramid_inputs(self, seed=3, n=500, g=2):
        sample = simulate(1, n, [seed, 0])
        return sample, g

    def test_single_candidate_selected(self):
        sample, g = self._pyramid_inputs()
        d = Dictionary(g, [np.ones(16)], [1.0])
        idx, scores = dictionary_select(d, sample, 0.03)
        assert idx == 0 and scores.shape == (1,)

    def test_tie_break_lowest_index(self):
        sample, g = self._pyramid_inputs()
        cand = np.ones(16)
        d = Dictionary(g, [cand, cand.copy()], [1.0, 1.0])
        idx, scores = dictionary_select(d, sample, 0.03)
        assert idx == 0
        assert scores[0] == scores[1]

    def test_uniform_delta_shift_leaves_choice_invariant(self):
        sample, g = self._pyramid_inputs(seed=9)
        rng = np.random.default_rng(0)
        cands = [rng.random(16) * 2 for _ in range(4)]
        base = np.array([1.0, 1.5, 2.0, 2.5])
        idx1, s1 = dictionary_select(Dictionary(g, cands, base), sample, 0.03)
        idx2, s2 = dictionary_select(Dictionary(g, cands, base + 3.0), sample, 0.03)
        assert idx1 == idx2
        assert np.allclose(s1, s2, rtol=1e-12)

    def test_weight_validation(self):
        with pytest.raises(ValidationError):
            Dictionary(1, [np.ones(4)], [0.5])  # delta below 1
        with pytest.raises(ValidationError):
            Dictionary(1, [np.ones(4), np.ones(4)], [1.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            Dictionary(1, [np.ones(5)], [1.0])  # wrong grid size
        bad = np.ones(4)
        bad[0] = -1.0
        with pytest.raises(ValidationError):
            Dictionary(1, [bad], [1.0])

    def test_kraft_guard(self):
        # three candidates at delta = 1: 3 e^{-1} > 1
        with pytest.raises(ValidationError):
            Dictionary(1, [np.ones(4)] * 3, [1.0, 1.0, 1.0])
