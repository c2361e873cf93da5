"""Tests for CLI commands."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from multiquant.core.metrics import ari
from multiquant.core.model import Partition


def run_cli(*args, env=None):
    """Run multiquant CLI command and return result."""
    cmd = [sys.executable, "-m", "multiquant.cli"] + [str(a) for a in args]
    if env is None:
        env = os.environ.copy()
    # Wide enough that rich never wraps table cells
    env.setdefault("COLUMNS", "200")
    return subprocess.run(cmd, capture_output=True, text=True, env=env)


@pytest.fixture
def pair_data(temp_dir, blobs, write_csv):
    """Blobs observed twice with small noise, written as L=2 rows."""
    points, labels = blobs
    gen = np.random.default_rng(3)
    rows = np.hstack([points + 0.01 * gen.standard_normal(points.shape) for _ in range(2)])
    return write_csv(temp_dir / "pairs.csv", rows), labels


def _fit(data, *extra):
    return run_cli("fit", data, "--L", "2", "--n", "3", "--seed", "1", "--restarts", "2", *extra)


class TestFitCommand:
    """Tests for fit command."""

    def test_fit_writes_codebook(self, pair_data, temp_dir):
        """Codebook JSON lands in --out with the fitted distortion."""
        data, _ = pair_data
        out = temp_dir / "codebook.json"

        result = _fit(data, "--out", out)

        assert result.returncode == 0, result.stderr
        codebook = json.loads(out.read_text())
        assert codebook["schema"] == "multiquant.codebook/1"
        assert codebook["n"] == 3
        assert codebook["d"] == 2
        assert codebook["weights"] == [1.0, 1.0]
        assert len(codebook["centers"]) == 3
        assert codebook["fit"]["distortion"] >= 0

    def test_fit_to_stdout(self, pair_data, temp_dir):
        """Without --out the codebook goes to stdout, byte for byte."""
        data, _ = pair_data
        out = temp_dir / "codebook.json"

        to_file = _fit(data, "--out", out)
        to_stdout = _fit(data)

        assert to_file.returncode == 0
        assert to_stdout.returncode == 0
        assert to_stdout.stdout == out.read_text()

    def test_fit_is_reproducible(self, pair_data, temp_dir):
        """Same seed, same bytes, whatever the thread count."""
        data, _ = pair_data
        first = temp_dir / "a.json"
        second = temp_dir / "b.json"

        _fit(data, "--out", first, "--threads", "1")
        _fit(data, "--out", second, "--threads", "3")

        assert first.read_bytes() == second.read_bytes()

    def test_fit_history(self, pair_data, temp_dir):
        """History CSV lists non-increasing distortions."""
        data, _ = pair_data
        history = temp_dir / "history.csv"

        result = _fit(data, "--out", temp_dir / "codebook.json", "--history", history)

        assert result.returncode == 0
        lines = history.read_text().splitlines()
        assert lines[0] == "iteration,distortion"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_wrong_weight_count(self, pair_data, temp_dir):
        """Three weights for L=2 is a usage error and writes nothing."""
        data, _ = pair_data
        out = temp_dir / "codebook.json"

        result = _fit(data, "--weights", "1,2,3", "--out", out)

        assert result.returncode == 2
        assert "Error" in result.stderr
        assert not out.exists()

    def test_too_many_centers(self, pair_data):
        """More centers than samples is a usage error."""
        data, _ = pair_data

        result = run_cli("fit", data, "--L", "2", "--n", "31", "--seed", "0")

        assert result.returncode == 2

    def test_power_below_one(self, pair_data):
        """r < 1 is rejected."""
        data, _ = pair_data

        result = _fit(data, "--r", "0.5")

        assert result.returncode == 2

    def test_missing_dataset(self, temp_dir):
        """Unreadable dataset is a data error."""
        result = run_cli("fit", temp_dir / "nope.csv", "--n", "2", "--seed", "0")

        assert result.returncode == 3

    def test_ragged_dataset(self, temp_dir):
        """Rows of differing width are a data error."""
        path = temp_dir / "ragged.csv"
        path.write_text("1,2\n3,4\n5\n")

        result = run_cli("fit", path, "--n", "2", "--seed", "0")

        assert result.returncode == 3

    def test_columns_not_divisible_by_L(self, temp_dir, write_csv):
        """Three columns cannot hold two observations."""
        path = write_csv(temp_dir / "odd.csv", [[1, 2, 3], [4, 5, 6], [7, 8, 9]])

        result = run_cli("fit", path, "--L", "2", "--n", "2", "--seed", "0")

        assert result.returncode == 3


class TestAssignCommand:
    """Tests for assign command."""

    def test_assign_labels(self, pair_data, temp_dir):
        """Labels recover the blobs."""
        data, labels = pair_data
        codebook = temp_dir / "codebook.json"
        out = temp_dir / "labels.csv"
        _fit(data, "--out", codebook)

        result = run_cli("assign", codebook, data, "--out", out)

        assert result.returncode == 0, result.stderr
        lines = out.read_text().splitlines()
        assert lines[0] == "index,label"
        assert len(lines) == 31
        assigned = [int(line.split(",")[1]) for line in lines[1:]]
        assert ari(Partition(assigned), Partition(labels)) == 1.0

    def test_assign_to_stdout(self, pair_data, temp_dir):
        """Without --out the labels go to stdout."""
        data, _ = pair_data
        codebook = temp_dir / "codebook.json"
        _fit(data, "--out", codebook)

        result = run_cli("assign", codebook, data)

        assert result.returncode == 0
        assert result.stdout.startswith("index,label\n")

    def test_assign_rejects_non_codebook(self, pair_data, temp_dir):
        """A JSON file without the codebook schema is a data error."""
        data, _ = pair_data
        bogus = temp_dir / "bogus.json"
        bogus.write_text(json.dumps({"centers": [[0, 0]]}))

        result = run_cli("assign", bogus, data)

        assert result.returncode == 3


class TestAnalyzeCommand:
    """Tests for analyze command."""

    def test_example2_cubic(self, temp_dir):
        """Closed-form uniform pair at r = 3 with an 8-point codebook."""
        out = temp_dir / "analysis.json"

        result = run_cli(
            "analyze", "--case", "example2", "--r", "3", "--lambda", "1",
            "--n", "8", "--grid-size", "257", "--out", out,
        )

        assert result.returncode == 0, result.stderr
        report = json.loads(out.read_text())
        assert report["schema"] == "multiquant.analysis/1"
        assert report["predictions"][0]["n"] == 8
        assert report["predictions"][0]["distortion"] == pytest.approx(0.0258437, abs=1e-7)
        centers = report["codebooks"][0]["centers"]
        assert len(centers) == 8
        assert all(0 < c < 1 for c in centers)
        assert centers == sorted(centers)

    def test_squared_error_case(self):
        """Squared error on the uniform pair, n = 8."""
        result = run_cli("analyze", "--case", "theorem1", "--n", "8")

        assert result.returncode == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["constants"]["c1"] == pytest.approx(2.0)
        assert report["predictions"][0]["distortion"] == pytest.approx(0.0855306, abs=1e-6)

    def test_general_power_case(self):
        """General r agrees with the closed form for equal weights."""
        result = run_cli("analyze", "--case", "theorem2", "--r", "3", "--lambda", "1", "--n", "8", "--grid-size", "65")

        assert result.returncode == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["predictions"][0]["distortion"] == pytest.approx(0.0258437, abs=1e-7)

    def test_several_n(self):
        """Repeated --n gives one prediction each, in order."""
        result = run_cli(
            "analyze", "--case", "example2", "--r", "3", "--lambda", "1",
            "--n", "4", "--n", "8", "--grid-size", "65",
        )

        assert result.returncode == 0
        report = json.loads(result.stdout)
        assert [p["n"] for p in report["predictions"]] == [4, 8]
        assert report["predictions"][0]["distortion"] > report["predictions"][1]["distortion"]

    def test_table_and_codebook_files(self, temp_dir):
        """Point density table and analytical codebook CSVs."""
        table = temp_dir / "density.csv"
        codebook = temp_dir / "codebook.csv"

        result = run_cli(
            "analyze", "--case", "example2", "--r", "3", "--lambda", "2", "--n", "4",
            "--grid-size", "65", "--out", temp_dir / "analysis.json",
            "--table", table, "--codebook", codebook,
        )

        assert result.returncode == 0, result.stderr
        table_lines = table.read_text().splitlines()
        assert table_lines[0] == "z,density,cdf"
        assert float(table_lines[-1].split(",")[2]) == pytest.approx(1.0)
        codebook_lines = codebook.read_text().splitlines()
        assert codebook_lines[0] == "n,index,center"
        assert len(codebook_lines) == 5

    def test_squared_error_case_rejects_cubic(self):
        """theorem1 with r = 3 is a usage error."""
        result = run_cli("analyze", "--case", "theorem1", "--r", "3", "--n", "8")

        assert result.returncode == 2

    def test_unknown_cell_constant(self):
        """d = 3 has no known cell constant."""
        result = run_cli("analyze", "--case", "theorem1", "--d", "3", "--n", "8")

        assert result.returncode == 4

    def test_lambda_and_weights_conflict(self):
        """--lambda and --weights are exclusive."""
        result = run_cli("analyze", "--case", "theorem2", "--r", "3", "--lambda", "2", "--weights", "1,2", "--n", "4")

        assert result.returncode == 2


class TestSimilarityCommand:
    """Tests for similarity command."""

    def test_relabeled_partitions(self, temp_dir):
        """Identical partitions up to relabeling score 1."""
        a = temp_dir / "a.csv"
        b = temp_dir / "b.csv"
        a.write_text("index,label\n0,0\n1,0\n2,1\n3,1\n4,2\n")
        b.write_text("index,label\n0,5\n1,5\n2,3\n3,3\n4,9\n")

        result = run_cli("similarity", a, b)

        assert result.returncode == 0, result.stderr
        scores = json.loads(result.stdout)
        assert scores["ari"] == 1.0
        assert scores["ami"] == 1.0

    def test_length_mismatch(self, temp_dir):
        """Label files of different lengths are a data error."""
        a = temp_dir / "a.csv"
        b = temp_dir / "b.csv"
        a.write_text("0\n0\n1\n")
        b.write_text("0\n1\n")

        result = run_cli("similarity", a, b)

        assert result.returncode == 3


class TestExperimentCommands:
    """Tests for experiment-noisy and experiment-highres."""

    def test_noisy(self, temp_dir, blobs, write_csv):
        """A tiny noisy experiment writes both result files."""
        points, _ = blobs
        write_csv(temp_dir / "blobs.csv", points)
        config = temp_dir / "noisy.json"
        config.write_text(
            json.dumps(
                {
                    "schema": "multiquant.experiment-noisy/1",
                    "dataset": "blobs.csv",
                    "noise": {"kind": "gaussian", "parameter": 0.01, "L": 2},
                    "n": [3],
                    "trials": 2,
                    "restarts": 2,
                    "seed": 5,
                }
            )
        )

        result = run_cli("experiment-noisy", config, "--threads", "2")

        assert result.returncode == 0, result.stderr
        lines = (temp_dir / "noisy.results.csv").read_text().splitlines()
        assert lines[0] == "method,n,metric,mean,ci_half"
        assert len(lines) == 7
        data = json.loads((temp_dir / "noisy.results.json").read_text())
        assert data["schema"] == "multiquant.result/1"

    def test_noisy_trials_override(self, temp_dir, blobs, write_csv):
        """--trials 0 is rejected before anything runs."""
        points, _ = blobs
        write_csv(temp_dir / "blobs.csv", points)
        config = temp_dir / "noisy.json"
        config.write_text(
            json.dumps(
                {
                    "schema": "multiquant.experiment-noisy/1",
                    "dataset": "blobs.csv",
                    "noise": {"kind": "uniform", "parameter": 0.1, "L": 2},
                    "n": [3],
                }
            )
        )

        result = run_cli("experiment-noisy", config, "--trials", "0")

        assert result.returncode == 2
        assert not (temp_dir / "noisy.results.csv").exists()

    def test_noisy_bad_config(self, temp_dir):
        """A config with the wrong schema is a data error."""
        config = temp_dir / "noisy.json"
        config.write_text(json.dumps({"schema": "something-else"}))

        result = run_cli("experiment-noisy", config)

        assert result.returncode == 3

    def test_highres(self, temp_dir):
        """A tiny high-resolution comparison writes all three files."""
        config = temp_dir / "highres.json"
        config.write_text(
            json.dumps(
                {
                    "schema": "multiquant.experiment-highres/1",
                    "r": 3,
                    "lambdas": [1],
                    "n": [4],
                    "m": 2000,
                    "restarts": 1,
                    "grid_size": 65,
                    "seed": 2,
                }
            )
        )

        result = run_cli("experiment-highres", config, "--threads", "1")

        assert result.returncode == 0, result.stderr
        assert (temp_dir / "highres.results.csv").read_text().startswith("lambda,n,alpha,")
        assert len((temp_dir / "highres.centers.csv").read_text().splitlines()) == 5
        assert json.loads((temp_dir / "highres.results.json").read_text())["schema"] == "multiquant.result/1"


class TestConfigAndDebugCommands:
    """Tests for config and debug commands."""

    def test_config_lists_settings(self):
        """Config shows every setting."""
        result = run_cli("config")

        assert result.returncode == 0
        for name in ("debug", "restarts", "max_iters", "grid_size"):
            assert name in result.stdout

    def test_config_reflects_environment(self):
        """MULTIQUANT_* overrides show up in the effective config."""
        env = os.environ.copy()
        env["MULTIQUANT_RESTARTS"] = "17"

        result = run_cli("config", env=env)

        assert result.returncode == 0
        assert "17" in result.stdout

    def test_debug_on_off(self):
        """Debug toggles persist to config.json."""
        config_file = Path(os.environ["MULTIQUANT_DIR"]) / "config.json"

        on = run_cli("debug", "on")
        assert on.returncode == 0
        assert "enabled" in on.stdout
        assert json.loads(config_file.read_text())["debug"] is True

        off = run_cli("debug", "off")
        assert off.returncode == 0
        assert "disabled" in off.stdout
        assert json.loads(config_file.read_text())["debug"] is False


class TestEntryPoint:
    """Tests for module entry point."""

    def test_help(self):
        """python -m multiquant.cli --help lists the commands."""
        result = run_cli("--help")

        assert result.returncode == 0
        for name in ("fit", "assign", "analyze", "similarity", "experiment-noisy"):
            assert name in result.stdout
