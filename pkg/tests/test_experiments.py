"""Tests for the experiment harness."""

import json
from pathlib import Path

import numpy as np
import pytest

from multiquant.core.metrics import ari
from multiquant.experiments import (
    ExperimentConfig,
    HighresConfig,
    NoiseKind,
    NoiseSpec,
    ground_truth_partition,
    inject_noise,
    load_csv,
    load_highres_config,
    load_noisy_config,
    make_streams,
    run_highres_experiment,
    run_noisy_experiment,
    standardize,
    uniform_pairs,
    write_highres_csv,
    write_highres_json,
    write_result_csv,
    write_result_json,
)
from multiquant.utils.exceptions import (
    ConfigError,
    EmptyDataset,
    InvalidParameter,
    ParseError,
    RaggedRows,
    ZeroVariance,
)


class TestLoadCsv:
    """Tests for CSV dataset ingestion."""

    def test_header_and_label_column(self, temp_dir):
        """A text header is skipped; feature columns are selected by name."""
        path = temp_dir / "data.csv"
        path.write_text("a,b,label\n1,2,setosa\n3,4,virginica\n")
        data = load_csv(path, ["a", "b"])

        np.testing.assert_array_equal(data, [[1, 2], [3, 4]])

    def test_columns_by_index(self, temp_dir):
        """Integer and digit-string indices both work, negatives from the end."""
        path = temp_dir / "data.csv"
        path.write_text("1,2,3\n4,5,6\n")

        np.testing.assert_array_equal(load_csv(path, [0, "2"]), [[1, 3], [4, 6]])
        np.testing.assert_array_equal(load_csv(path, [-1]), [[3], [6]])

    def test_no_header(self, temp_dir):
        """Numeric first rows are data."""
        path = temp_dir / "data.csv"
        path.write_text("0.5,1e-3\n2,3\n")

        assert load_csv(path).shape == (2, 2)

    def test_ragged(self, temp_dir):
        """Rows must share a width."""
        path = temp_dir / "data.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(RaggedRows):
            load_csv(path)

    def test_non_numeric_feature(self, temp_dir):
        """Text in a selected column is a parse error."""
        path = temp_dir / "data.csv"
        path.write_text("a,b\n1,x\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_unknown_column(self, temp_dir):
        """Names must exist in the header."""
        path = temp_dir / "data.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ParseError):
            load_csv(path, ["c"])

    def test_header_only(self, temp_dir):
        """A header without rows is empty."""
        path = temp_dir / "data.csv"
        path.write_text("a,b\n")
        with pytest.raises(EmptyDataset):
            load_csv(path)

    def test_missing_file(self, temp_dir):
        """Unreadable paths are parse errors."""
        with pytest.raises(ParseError):
            load_csv(temp_dir / "missing.csv")


class TestStandardize:
    """Tests for per-column scaling."""

    def test_unit_variance(self, rng):
        """Each column ends with sample variance 1."""
        points = rng.standard_normal((50, 3)) * np.array([2.0, 0.5, 10.0])
        scaled = standardize(points)

        np.testing.assert_allclose(scaled.var(axis=0, ddof=1), 1.0, rtol=1e-12)
        np.testing.assert_allclose(scaled * points.std(axis=0, ddof=1), points, rtol=1e-12)

    def test_idempotent(self, rng):
        """Standardizing twice changes nothing."""
        once = standardize(rng.standard_normal((20, 2)))

        np.testing.assert_allclose(standardize(once), once, rtol=1e-12)

    def test_zero_variance(self):
        """A constant column cannot be scaled."""
        with pytest.raises(ZeroVariance):
            standardize(np.array([[1.0, 2.0], [1.0, 3.0]]))

    def test_needs_two_samples(self):
        """One sample has no variance."""
        with pytest.raises(InvalidParameter):
            standardize(np.array([[1.0, 2.0]]))


class TestNoise:
    """Tests for noise injection."""

    def test_spec_validation(self):
        """Noise parameters must be positive and L at least 1."""
        with pytest.raises(InvalidParameter):
            NoiseSpec("gaussian", 0.0, 2)
        with pytest.raises(InvalidParameter):
            NoiseSpec("uniform", 1.0, 0)
        assert NoiseSpec("uniform", 1.0, 2).kind is NoiseKind.UNIFORM

    def test_shape(self, blobs):
        """Output has L observations per clean sample."""
        points, _ = blobs
        ds = inject_noise(points, NoiseSpec("gaussian", 1.0, 4))

        assert (ds.m, ds.L, ds.d) == (30, 4, 2)

    def test_tiny_noise(self, blobs):
        """Vanishing variance reproduces the clean data."""
        points, _ = blobs
        ds = inject_noise(points, NoiseSpec("gaussian", 1e-18, 3))

        np.testing.assert_allclose(ds.observations, np.repeat(points[:, None, :], 3, axis=1), atol=1e-8)

    def test_gaussian_variance(self):
        """Gaussian deviations have the requested variance."""
        clean = np.zeros((1500, 4))
        ds = inject_noise(clean, NoiseSpec("gaussian", 2.0, 4, seed=3))

        assert ds.observations.var() == pytest.approx(2.0, rel=0.05)

    def test_uniform_bounds(self, blobs):
        """Uniform deviations stay within [-eta, eta]."""
        points, _ = blobs
        ds = inject_noise(points, NoiseSpec("uniform", 0.5, 4, seed=1))
        deviations = ds.observations - points[:, None, :]

        assert np.all(np.abs(deviations) <= 0.5 + 1e-12)

    def test_seeded(self, blobs):
        """The same seed gives the same draw, another seed a different one."""
        points, _ = blobs
        a = inject_noise(points, NoiseSpec("gaussian", 1.0, 2, seed=5))
        b = inject_noise(points, NoiseSpec("gaussian", 1.0, 2, seed=5))
        c = inject_noise(points, NoiseSpec("gaussian", 1.0, 2, seed=6))

        np.testing.assert_array_equal(a.observations, b.observations)
        assert not np.array_equal(a.observations, c.observations)


class TestStreams:
    """Tests for per-trial random streams."""

    def test_replayable(self):
        """Streams depend only on the master seed and trial index."""
        a, b = make_streams(7, 3), make_streams(7, 3)

        assert a.fit_seed == b.fit_seed
        np.testing.assert_array_equal(a.noise.random(5), b.noise.random(5))

    def test_trials_differ(self):
        """Different trials draw different noise and fit seeds."""
        a, b = make_streams(7, 3), make_streams(7, 4)

        assert a.fit_seed != b.fit_seed
        assert not np.array_equal(a.noise.random(5), b.noise.random(5))

    def test_fit_seed_range(self):
        """Fit seeds are nonnegative 63-bit integers."""
        assert 0 <= make_streams(0, 0).fit_seed < 2**63


class TestGroundTruth:
    """Tests for the clean-data partition."""

    def test_recovers_blobs(self, blobs):
        """Well separated blobs are recovered exactly."""
        points, labels = blobs

        assert ari(ground_truth_partition(points, 3, seed=0), labels) == 1.0

    def test_extremes(self, blobs):
        """n = 1 puts everything together; n = m separates every point."""
        points, _ = blobs

        single = ground_truth_partition(points, 1, seed=0)
        assert set(single.labels.tolist()) == {0}
        assert ari(single, single) == 1.0
        assert ground_truth_partition(points, 30, seed=0, restarts=1).n_clusters == 30


def _noisy_config(temp_dir, **overrides):
    fields = {
        "dataset": temp_dir / "blobs.csv",
        "noise": NoiseSpec("gaussian", 1e-12, 2),
        "n_values": (3,),
        "trials": 3,
        "restarts": 3,
        "seed": 11,
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)


IRIS = Path(__file__).resolve().parent.parent / "data" / "iris.csv"


def _iris_config(noise):
    return ExperimentConfig(
        dataset=IRIS,
        noise=noise,
        n_values=(3,),
        trials=200,
        restarts=10,
        seed=7,
        columns=(0, 1, 2, 3),
    )


class TestConfigs:
    """Tests for experiment configuration files."""

    def _write(self, path, data):
        path.write_text(json.dumps(data))
        return path

    def test_noisy(self, temp_dir):
        """Fields are read and the dataset resolves next to the config."""
        path = self._write(
            temp_dir / "exp.json",
            {
                "schema": "multiquant.experiment-noisy/1",
                "dataset": "iris.csv",
                "columns": [0, 1, 2, 3],
                "noise": {"kind": "uniform", "parameter": 2.0, "L": 4},
                "n": [2, 3],
                "trials": 20,
                "seed": 7,
            },
        )
        cfg = load_noisy_config(path)

        assert cfg.dataset == temp_dir / "iris.csv"
        assert cfg.noise.kind is NoiseKind.UNIFORM
        assert cfg.noise.seed == 7
        assert cfg.n_values == (2, 3)
        assert cfg.spec.weights == (1.0, 1.0, 1.0, 1.0)
        assert cfg.columns == (0, 1, 2, 3)

    def test_noisy_single_n_and_weights(self, temp_dir):
        """A scalar n is a one-element sweep; weights set the distortion."""
        path = self._write(
            temp_dir / "exp.json",
            {
                "schema": "multiquant.experiment-noisy/1",
                "dataset": "/data/wine.csv",
                "noise": {"kind": "gaussian", "parameter": 1.0, "L": 2},
                "n": 3,
                "r": 3,
                "weights": [1, 2],
            },
        )
        cfg = load_noisy_config(path)

        assert cfg.dataset == Path("/data/wine.csv")
        assert cfg.n_values == (3,)
        assert cfg.spec.weights == (1.0, 2.0)
        assert cfg.spec.r == 3.0

    @pytest.mark.parametrize(
        "change",
        [
            {"schema": "multiquant.experiment-noisy/0"},
            {"n": []},
            {"n": [2.5]},
            {"trials": 0},
            {"weights": [1, 2, 3]},
            {"noise": {"kind": "laplace", "parameter": 1.0, "L": 2}},
            {"noise": {"kind": "gaussian", "parameter": -1.0, "L": 2}},
            {"noise": {"kind": "gaussian", "L": 2}},
            {"r": 0.5},
        ],
    )
    def test_noisy_invalid(self, temp_dir, change):
        """Invalid files raise ConfigError."""
        data = {
            "schema": "multiquant.experiment-noisy/1",
            "dataset": "x.csv",
            "noise": {"kind": "gaussian", "parameter": 1.0, "L": 2},
            "n": [2],
        }
        data.update(change)
        with pytest.raises(ConfigError):
            load_noisy_config(self._write(temp_dir / "exp.json", data))

    def test_not_json(self, temp_dir):
        """Broken JSON is a config error."""
        path = temp_dir / "exp.json"
        path.write_text("{")
        with pytest.raises(ConfigError):
            load_noisy_config(path)

    def test_missing_file(self, temp_dir):
        """Unreadable files are config errors."""
        with pytest.raises(ConfigError):
            load_highres_config(temp_dir / "missing.json")

    def test_highres(self, temp_dir):
        """High-resolution settings are read with defaults."""
        path = self._write(
            temp_dir / "hr.json",
            {"schema": "multiquant.experiment-highres/1", "r": 3, "lambdas": [1, 2], "n": [4], "m": 1000},
        )
        cfg = load_highres_config(path)

        assert cfg.lambdas == (1.0, 2.0)
        assert cfg.n_values == (4,)
        assert cfg.spec(2.0).weights == (1.0, 2.0)
        assert cfg.grid_size == 1025

    @pytest.mark.parametrize(
        "change", [{"r": 1}, {"m": 2}, {"lambdas": [0]}, {"grid_size": 2}, {"lambdas": "a"}]
    )
    def test_highres_invalid(self, temp_dir, change):
        """Out-of-range settings raise ConfigError."""
        data = {"schema": "multiquant.experiment-highres/1", "r": 3, "lambdas": [1], "n": [4], "m": 100}
        data.update(change)
        with pytest.raises(ConfigError):
            load_highres_config(self._write(temp_dir / "hr.json", data))


class TestNoisyExperiment:
    """Tests for the Monte Carlo runner."""

    def test_noise_free_limit(self, temp_dir, blobs):
        """Without noise both methods recover the clean partition."""
        points, _ = blobs
        result = run_noisy_experiment(_noisy_config(temp_dir), clean=points)

        assert len(result.rows) == 2 * 1 * 3
        for method in ("ordinary", "proposed"):
            assert result.mean(method, 3, "ari") == 1.0
            assert result.mean(method, 3, "ami") == 1.0
            assert result.get(method, 3, "ari").ci_half == 0.0

    def test_row_order(self, temp_dir, blobs):
        """Rows are ordered by method, then n, then metric."""
        points, _ = blobs
        cfg = _noisy_config(temp_dir, n_values=(2, 3), trials=2)
        keys = [(r.method, r.n, r.metric) for r in run_noisy_experiment(cfg, clean=points).rows]

        assert keys[:4] == [("ordinary", 2, "ari"), ("ordinary", 2, "ami"), ("ordinary", 2, "distortion"), ("ordinary", 3, "ari")]
        assert keys[-1] == ("proposed", 3, "distortion")

    def test_deterministic_across_workers(self, temp_dir, blobs):
        """The same seed gives identical results for any worker count."""
        points, _ = blobs
        cfg = _noisy_config(temp_dir, noise=NoiseSpec("gaussian", 4.0, 3), trials=4)
        sequential = run_noisy_experiment(cfg, threads=1, clean=points)
        parallel = run_noisy_experiment(cfg, threads=3, clean=points)

        assert sequential.rows == parallel.rows

    def test_reads_dataset_from_config(self, temp_dir, blobs, write_csv):
        """The clean data comes from the configured CSV, standardized on request."""
        points, _ = blobs
        write_csv(temp_dir / "blobs.csv", points, header=["x", "y"])
        cfg = _noisy_config(temp_dir, standardize=True, trials=1)
        result = run_noisy_experiment(cfg)

        assert result.metadata["dataset"] == "blobs.csv"
        assert result.metadata["standardize"] is True
        assert result.mean("proposed", 3, "ari") == 1.0

    def test_writers(self, temp_dir, blobs):
        """CSV and JSON summaries carry every row."""
        points, _ = blobs
        result = run_noisy_experiment(_noisy_config(temp_dir, trials=2), clean=points)
        write_result_csv(result, temp_dir / "out.csv")
        write_result_json(result, temp_dir / "out.json")

        lines = (temp_dir / "out.csv").read_text().splitlines()
        assert lines[0] == "method,n,metric,mean,ci_half"
        assert len(lines) == 7
        data = json.loads((temp_dir / "out.json").read_text())
        assert data["schema"] == "multiquant.result/1"
        assert data["trials"] == 2
        assert len(data["rows"]) == 6

    def test_single_center_scores_one(self, temp_dir, blobs):
        """With n = 1 every partition is trivial and matches the truth."""
        points, _ = blobs
        cfg = _noisy_config(temp_dir, noise=NoiseSpec("gaussian", 4.0, 2), n_values=(1,), trials=2)
        result = run_noisy_experiment(cfg, clean=points)

        for method in ("ordinary", "proposed"):
            assert result.mean(method, 1, "ari") == 1.0
            assert result.mean(method, 1, "ami") == 1.0

    @pytest.mark.slow
    @pytest.mark.skipif(not IRIS.exists(), reason="data/iris.csv not present")
    def test_iris_gaussian_noise(self):
        """On Iris with four noisy copies, common centers win and gain most at sigma^2 = 4."""
        gaps = {}
        for variance in (0.25, 1.0, 4.0):
            result = run_noisy_experiment(_iris_config(NoiseSpec("gaussian", variance, 4)), threads=4)
            gaps[variance] = result.mean("proposed", 3, "ari") - result.mean("ordinary", 3, "ari")

        assert gaps[1.0] > 0
        assert gaps[4.0] > 0
        assert gaps[4.0] == max(gaps.values())

    @pytest.mark.slow
    @pytest.mark.skipif(not IRIS.exists(), reason="data/iris.csv not present")
    def test_iris_uniform_noise(self):
        """Two uniform-noise copies with eta = 2 also favor common centers."""
        result = run_noisy_experiment(_iris_config(NoiseSpec("uniform", 2.0, 2)), threads=4)

        assert result.mean("proposed", 3, "ari") > result.mean("ordinary", 3, "ari")

    @pytest.mark.slow
    def test_proposed_beats_ordinary_under_heavy_noise(self):
        """Common centers cluster noisy repeats better than concatenation."""
        gen = np.random.default_rng(3)
        means = np.array([[0, 0, 0, 0], [6, 0, 0, 0], [0, 6, 0, 0]], dtype=float)
        clean = np.concatenate([m + 0.5 * gen.standard_normal((50, 4)) for m in means])
        cfg = ExperimentConfig(
            dataset=Path("synthetic.csv"),
            noise=NoiseSpec("gaussian", 16.0, 4),
            n_values=(3,),
            trials=40,
            restarts=5,
            seed=1,
        )
        result = run_noisy_experiment(cfg, threads=4, clean=clean)

        assert result.mean("proposed", 3, "ari") > result.mean("ordinary", 3, "ari")
        assert result.mean("proposed", 3, "ami") > result.mean("ordinary", 3, "ami")


class TestHighresExperiment:
    """Tests for the fitted vs analytical comparison."""

    def test_small_run(self, temp_dir):
        """One (lambda, n) cell with sorted centers and a finite comparison."""
        cfg = HighresConfig(r=3.0, lambdas=(1.0,), n_values=(4,), m=4000, restarts=2, grid_size=65)
        result = run_highres_experiment(cfg)
        row = result.get(1.0, 4)

        assert np.all(np.diff(row.numerical_centers) > 0)
        np.testing.assert_allclose(row.analytical_centers + row.analytical_centers[::-1], 1.0, atol=1e-7)
        assert row.predicted_distortion == pytest.approx(0.025 + 1.5 / 12 * 0.432 / 16, abs=1e-7)
        assert row.max_center_gap < 0.1
        assert row.empirical_distortion <= row.analytical_distortion + 1e-3

        write_highres_csv(result, temp_dir / "hr.csv", temp_dir / "centers.csv")
        write_highres_json(result, temp_dir / "hr.json")
        assert (temp_dir / "hr.csv").read_text().startswith("lambda,n,alpha,")
        assert len((temp_dir / "centers.csv").read_text().splitlines()) == 5
        assert json.loads((temp_dir / "hr.json").read_text())["kind"] == "highres"

    def test_uniform_pairs_seeded(self):
        """The shared sample set depends only on the seed."""
        a, b = uniform_pairs(10, 4), uniform_pairs(10, 4)

        np.testing.assert_array_equal(a.observations, b.observations)
        assert (a.L, a.d) == (2, 1)

    def test_fit_trace_recorded(self):
        """Each row keeps the non-increasing Lloyd trace of its winning fit."""
        cfg = HighresConfig(r=3.0, lambdas=(2.0,), n_values=(3,), m=2000, restarts=1, grid_size=33)
        row = run_highres_experiment(cfg).get(2.0, 3)

        assert row.fit_distortions
        assert row.fit_distortions[-1] == row.empirical_distortion
        assert all(b <= a for a, b in zip(row.fit_distortions, row.fit_distortions[1:]))

    @pytest.mark.slow
    @pytest.mark.parametrize("r, n", [(3.0, 4), (4.0, 8)])
    def test_analytical_codebook_tracks_fit(self, r, n):
        """Inverse-transform centers sit close to the Lloyd optimum for every weight."""
        cfg = HighresConfig(
            r=r,
            lambdas=(1.0, 2.0, 3.0, 4.0, 5.0),
            n_values=(n,),
            m=200_000,
            restarts=2,
            grid_size=257,
        )
        result = run_highres_experiment(cfg, threads=2)

        assert len(result.rows) == 5
        for row in result.rows:
            assert row.max_center_gap <= 0.03
            assert row.interior_center_gap <= 0.015
            assert all(b <= a for a, b in zip(row.fit_distortions, row.fit_distortions[1:]))
            if n == 8:
                assert row.distortion_gap <= 0.03

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [4, 8])
    def test_squared_error_constant(self, n):
        """Lloyd on uniform pairs lands near 1/12 + (9/64)/n^2, far from 1/3 + (9/64)/n^2."""
        cfg = HighresConfig(r=2.0, lambdas=(1.0,), n_values=(n,), m=200_000, restarts=2, grid_size=257)
        row = run_highres_experiment(cfg, threads=2).get(1.0, n)
        fitted = row.empirical_distortion

        assert fitted == pytest.approx(1 / 12 + 9 / 64 / n**2, rel=0.03)
        assert abs(fitted - (1 / 3 + 9 / 64 / n**2)) > 0.3 * (1 / 3 + 9 / 64 / n**2)
        assert all(b <= a for a, b in zip(row.fit_distortions, row.fit_distortions[1:]))
