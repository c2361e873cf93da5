"""Tests for configuration module."""

import json
import os

from multiquant.utils.config import Config, get_multiquant_dir


def test_config_default_values(mock_multiquant_dir):
    """Config should have sensible defaults."""
    config = Config(mock_multiquant_dir)

    assert config.debug is False
    assert config.threads == 0
    assert config.restarts == 10
    assert config.max_iters == 500
    assert config.rel_tol == 1e-9
    assert config.trials == 200
    assert config.grid_size == 1025


def test_config_loads_from_file(mock_multiquant_dir):
    """Config should load values from config.json."""
    (mock_multiquant_dir / "config.json").write_text(
        json.dumps({"restarts": 3, "trials": 50, "rel_tol": 1e-6})
    )

    config = Config(mock_multiquant_dir)

    assert config.restarts == 3
    assert config.trials == 50
    assert config.rel_tol == 1e-6


def test_config_save(mock_multiquant_dir):
    """Config should save changes to file."""
    config = Config(mock_multiquant_dir)
    config.threads = 4
    config.save()

    data = json.loads((mock_multiquant_dir / "config.json").read_text())
    assert data["threads"] == 4
    assert data["env"] == {}


def test_config_ignores_malformed_file(mock_multiquant_dir):
    """A broken config.json falls back to defaults."""
    (mock_multiquant_dir / "config.json").write_text("{not json")

    config = Config(mock_multiquant_dir)

    assert config.restarts == 10


def test_set_debug_persists(mock_multiquant_dir):
    """set_debug writes the flag to disk."""
    Config(mock_multiquant_dir).set_debug(True)

    assert Config(mock_multiquant_dir).get_debug() is True


def test_get_multiquant_dir_from_env(mock_multiquant_dir):
    """MULTIQUANT_DIR selects the data directory."""
    assert get_multiquant_dir() == mock_multiquant_dir


def test_get_multiquant_dir_default(monkeypatch):
    """Without MULTIQUANT_DIR the XDG location is used."""
    monkeypatch.delenv("MULTIQUANT_DIR")
    assert get_multiquant_dir().parts[-2:] == (".config", "multiquant")


class TestEnvOverrides:
    """Tests for env-section and shell overrides."""

    def test_shell_env_overrides_file(self, mock_multiquant_dir, monkeypatch):
        """Shell MULTIQUANT_* vars win over config.json."""
        (mock_multiquant_dir / "config.json").write_text(json.dumps({"threads": 2}))
        monkeypatch.setenv("MULTIQUANT_THREADS", "6")

        assert Config(mock_multiquant_dir).threads == 6

    def test_config_env_section(self, mock_multiquant_dir):
        """The env section of config.json is applied with type coercion."""
        (mock_multiquant_dir / "config.json").write_text(
            json.dumps({"env": {"MULTIQUANT_RESTARTS": "4", "rel_tol": "1e-7", "DEBUG": "yes"}})
        )

        config = Config(mock_multiquant_dir)

        assert config.restarts == 4
        assert config.rel_tol == 1e-7
        assert config.debug is True

    def test_shell_env_beats_env_section(self, mock_multiquant_dir, monkeypatch):
        """Shell vars are applied after the persisted env section."""
        (mock_multiquant_dir / "config.json").write_text(
            json.dumps({"env": {"MULTIQUANT_TRIALS": "5"}})
        )
        monkeypatch.setenv("MULTIQUANT_TRIALS", "7")

        assert Config(mock_multiquant_dir).trials == 7

    def test_invalid_value_is_ignored(self, mock_multiquant_dir, monkeypatch):
        """Values that do not parse leave the default in place."""
        monkeypatch.setenv("MULTIQUANT_MAX_ITERS", "many")

        assert Config(mock_multiquant_dir).max_iters == 500

    def test_unknown_keys_are_ignored(self, mock_multiquant_dir, monkeypatch):
        """Vars that are not settings do not become attributes."""
        monkeypatch.setenv("MULTIQUANT_COLOR", "blue")

        assert not hasattr(Config(mock_multiquant_dir), "color")


class TestEffectiveThreads:
    """Tests for worker-count resolution."""

    def test_zero_means_all_cores(self, mock_multiquant_dir):
        """threads = 0 resolves to the CPU count."""
        assert Config(mock_multiquant_dir).effective_threads() == (os.cpu_count() or 1)

    def test_override_wins(self, mock_multiquant_dir):
        """An explicit override replaces the configured value."""
        config = Config(mock_multiquant_dir)
        config.threads = 8

        assert config.effective_threads(2) == 2
        assert config.effective_threads() == 8
