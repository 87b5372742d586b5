import math

import numpy as np
import pytest
from scipy.integrate import quad

from mctd.errors import ValidationError
from mctd.sim import (
    EXAMPLES,
    ExperimentConfig,
    RiskReport,
    RiskRow,
    chain_spec,
    read_risk_csv,
    run_experiment,
    run_replicate,
    simulate,
    true_density,
)


class TestSimulate:
    def test_same_seed_identical_twice(self):
        a = simulate(2, 200, [5, 1])
        b = simulate(2, 200, [5, 1])
        assert np.array_equal(a.points, b.points)

    def test_different_replicate_seeds_differ(self):
        a = simulate(1, 100, [5, 1])
        b = simulate(1, 100, [5, 2])
        assert not np.array_equal(a.points, b.points)

    def test_row_count(self):
        assert simulate(3, 50, 0).points.shape == (51, 1)

    def test_burn_in_defaults(self):
        for ex in (1, 2, 3, 4):
            assert chain_spec(ex).burn_in == 10_000
        for ex in (5, 6, 7):
            assert chain_spec(ex).burn_in == 0
            assert simulate(ex, 10, 0).points[0, 0] == 0.5

    def test_invalid_example_rejected(self):
        with pytest.raises(ValidationError, match="1..7"):
            simulate(9, 10, 0)
        with pytest.raises(ValidationError):
            true_density(0)

    def test_example1_long_run_mean(self):
        # AR(1) x -> 0.5 x + 0.25 + noise/4 has stationary mean 1/2.
        sample = simulate(1, 10_000, [11, 0])
        assert abs(float(sample.points.mean()) - 0.5) < 0.02

    def test_example7_states_stay_positive(self):
        sample = simulate(7, 2000, [3, 0])
        assert np.all(sample.points > 0.0)


class TestDensities:
    def test_example1_pointwise_gaussian_value(self):
        truth = true_density(1)
        want = 1.0 / (0.25 * math.sqrt(2 * math.pi))
        assert float(truth.pdf(0.5, 0.5)) == pytest.approx(want, rel=1e-12)
        assert want == pytest.approx(1.59577, abs=5e-6)

    @pytest.mark.parametrize("example", EXAMPLES)
    def test_normalization(self, example):
        truth = true_density(example)
        rng = np.random.default_rng(example)
        for x in rng.random(20) * 0.98 + 0.01:
            points = [truth.y_breakpoint(float(x))] if example == 7 else None
            # long enough upper limit for the exponential tail of example 7
            upper = 12.0 if example != 7 else float(points[0] + 45.0 * x)
            total, _ = quad(
                lambda y: float(truth.pdf(np.array(x), np.array(y))),
                -10.0, upper, limit=400, points=points,
            )
            assert abs(total - 1.0) < 1e-6

    def test_example6_matches_transition_histogram(self):
        # One-step Monte-Carlo from a fixed state vs the closed form 2 f(2y - x).
        truth = true_density(6)
        x = 0.3
        spec = chain_spec(6)
        rng = np.random.default_rng(123)
        draws = np.array([spec.step(x, u) for u in spec.draw_noise(rng, 100_000)])
        edges = np.linspace(-0.2, 1.2, 21)
        counts, _ = np.histogram(draws, bins=edges)
        m = draws.size
        for k in range(20):
            p, _ = quad(lambda y: float(truth.pdf(np.array(x), np.array(y))),
                        edges[k], edges[k + 1])
            sigma = math.sqrt(max(m * p * (1 - p), 1.0))
            assert abs(counts[k] - m * p) <= 3.0 * sigma + 3.0

    def test_example7_breakpoint_location(self):
        truth = true_density(7)
        x = 0.4
        c = truth.y_breakpoint(x)
        assert c == pytest.approx(x / (50 * x + 1))
        assert float(truth.pdf(x, c - 1e-9)) == 0.0
        assert float(truth.pdf(x, c + 1e-9)) > 0.0


class TestExperiment:
    def test_rows_deterministic_and_sorted(self):
        cfg = ExperimentConfig(example=5, n=120, levels=(2, 3), replicates=3,
                               base_seed=7, compute_l2=False)
        a = run_experiment(cfg)
        b = run_experiment(cfg)
        assert a.rows == b.rows
        assert [r.replicate for r in a.rows] == [0, 0, 1, 1, 2, 2]

    def test_replicates_independent_of_execution_order(self):
        cfg = ExperimentConfig(example=5, n=120, levels=(2,), replicates=4,
                               base_seed=7, compute_l2=False)
        whole = run_experiment(cfg).rows
        shuffled = []
        for rep in (2, 0, 3, 1):
            shuffled.extend(run_replicate(cfg, rep))
        shuffled.sort(key=lambda r: (r.replicate, r.ell))
        assert shuffled == whole

    def test_oracle_column_and_ratio(self):
        cfg = ExperimentConfig(example=5, n=150, levels=(3,), replicates=2,
                               with_oracle=True)
        rows = run_experiment(cfg).rows
        for r in rows:
            assert r.oracle_h2 is not None and r.oracle_h2 <= r.h2_risk + 1e-15
            assert r.ratio == pytest.approx(r.h2_risk / r.oracle_h2)

    def test_csv_roundtrip_and_summary_sibling(self, tmp_path):
        cfg = ExperimentConfig(example=5, n=120, levels=(2,), replicates=2,
                               with_oracle=True)
        report = run_experiment(cfg)
        path = tmp_path / "risk.csv"
        report.write_csv(path)
        assert (tmp_path / "risk_summary.csv").exists()
        back = read_risk_csv(path)
        assert back.rows == report.rows
        header = path.read_text().splitlines()[0]
        assert header == "example,ell,L,n,replicate,seed,h2_risk,l2_risk,oracle_h2,ratio"

    def test_summary_aggregates(self):
        rows = [
            RiskRow(1, 2, 0.03, 100, i, 0, h2_risk=0.01 * (i + 1),
                    l2_risk=0.1, oracle_h2=0.01, ratio=float(i + 1))
            for i in range(4)
        ]
        rec = RiskReport(rows).summary()[0]
        assert rec["replicates"] == 4
        assert rec["mean_h2"] == pytest.approx(0.025)
        assert rec["ratio_q50"] == pytest.approx(2.5)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(example=8)
        with pytest.raises(ValidationError):
            ExperimentConfig(example=1, replicates=0)
        with pytest.raises(ValidationError):
            ExperimentConfig(example=1, levels=(0,))
