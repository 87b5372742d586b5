import csv
import json

import numpy as np
import pytest

from mctd import reference_values as refs
from mctd.cli import main
from mctd.select import SelectionResult


def run(*args):
    return main([str(a) for a in args])


class TestSimulateCommand:
    def test_row_count(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run("simulate", "--example", 1, "--n", 1000, "--seed", 7,
                   "--out", out) == 0
        assert len(out.read_text().splitlines()) == 1001

    def test_rerun_is_byte_identical(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert run("simulate", "--example", 5, "--n", 200, "--seed", 3,
                       "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_example_exit_code(self, tmp_path, capsys):
        code = run("simulate", "--example", 9, "--n", 10,
                   "--out", tmp_path / "x.csv")
        assert code == 2
        assert "1..7" in capsys.readouterr().err


class TestEstimateCommand:
    def test_outputs_and_json_roundtrip(self, tmp_path):
        outdir = tmp_path / "est"
        assert run("estimate", "--example", 1, "--n", 400, "--ell", 4,
                   "--seed", 2, "--out", outdir) == 0
        result = SelectionResult.from_json((outdir / "result.json").read_text())
        assert len(result.partition.cells) >= 1
        grid = np.loadtxt(outdir / "density_grid.csv", delimiter=",")
        assert grid.shape == (256, 256)
        assert np.all(grid >= 0.0)
        truth_grid = np.loadtxt(outdir / "truth_grid.csv", delimiter=",")
        assert truth_grid.shape == (256, 256)

    def test_tiny_sample_gives_trivial_partition(self, tmp_path):
        # n = 4 transitions: the penalty dominates any refinement.
        sample = tmp_path / "tiny.csv"
        sample.write_text("0.1\n0.9\n0.2\n0.8\n0.3\n")
        outdir = tmp_path / "est"
        assert run("estimate", "--input", sample, "--ell", 3, "--L", 15.0,
                   "--out", outdir) == 0
        result = SelectionResult.from_json((outdir / "result.json").read_text())
        assert len(result.partition.cells) == 1

    def test_two_point_sample_fails_validation(self, tmp_path):
        # The selection rule requires n > 3 transitions.
        sample = tmp_path / "two.csv"
        sample.write_text("0.1\n0.9\n")
        assert run("estimate", "--input", sample, "--out", tmp_path / "e") == 2

    def test_missing_input_is_io_failure(self, tmp_path):
        assert run("estimate", "--input", tmp_path / "absent.csv",
                   "--out", tmp_path / "e") == 3

    def test_malformed_csv_reports_line(self, tmp_path, capsys):
        sample = tmp_path / "bad.csv"
        sample.write_text("0.1\noops\n")
        assert run("estimate", "--input", sample, "--out", tmp_path / "e") == 2
        assert ":2:" in capsys.readouterr().err

    def test_example_and_input_mutually_exclusive(self, tmp_path):
        assert run("estimate", "--example", 1, "--input", "x.csv",
                   "--out", tmp_path / "e") == 2


class TestRiskCommand:
    def test_report_rows(self, tmp_path):
        out = tmp_path / "risk.csv"
        assert run("risk", "--example", 5, "--n", 150, "--ell", 2, "--ell", 3,
                   "--replicates", 2, "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        assert (tmp_path / "risk_summary.csv").exists()


class TestReproduceCommand:
    def test_figure2_emits_ten_level_rows(self, tmp_path):
        outdir = tmp_path / "rep"
        assert run("reproduce", "figure2", "--example", 5, "--replicates", 1,
                   "--out", outdir) == 0
        with open(outdir / "figure2_ex5_comparison.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 10
        assert [r["label"] for r in rows] == [f"ell={k}" for k in range(1, 11)]
        for r in rows:
            dev = (float(r["measured"]) - float(r["published"])) / float(r["published"])
            assert float(r["rel_dev"]) == pytest.approx(dev)


class TestBenchCommand:
    def test_schema_stable(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert run("bench", "--n", 200, "--n", 400, "--ell", 3,
                       "--out", out) == 0
        header = "backend,n,ell,seconds,cube_visits"
        assert a.read_text().splitlines()[0] == header
        assert b.read_text().splitlines()[0] == header

    def test_visit_counts_deterministic(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run("bench", "--n", 300, "--ell", 4, "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        visits = {r["cube_visits"] for r in rows}
        assert len(visits) == 1  # both backends count the same cubes


class TestPublishedFixtures:
    def test_constants_match_committed_csv(self):
        assert refs.load_fixture() == refs.as_fixture_dict()

    def test_figure2_first_row_values(self):
        assert refs.FIGURE2_RISK[(1, 1)] == 0.031
        assert refs.FIGURE2_RISK[(2, 1)] == 0.011
        assert refs.FIGURE2_RISK[(3, 1)] == 0.011

    def test_figure4_reference_rows(self):
        assert refs.FIGURE4["mean_h2"][1] == 0.011
        assert refs.FIGURE4["mean_oracle_h2"][1] == 0.007
        assert refs.FIGURE4["ratio_q50"][1] == 1.473
        assert refs.FIGURE5_L2[1] == 0.064
