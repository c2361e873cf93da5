"""Shared pytest fixtures."""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest

from multiquant.utils import debug as debug_module


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test data."""
    with tempfile.TemporaryDirectory() as d:
        yield Path(d)


@pytest.fixture
def mock_multiquant_dir(temp_dir, monkeypatch):
    """Set up a mock ~/.config/multiquant directory."""
    mq_dir = temp_dir / ".multiquant"
    mq_dir.mkdir()
    monkeypatch.setenv("MULTIQUANT_DIR", str(mq_dir))
    return mq_dir


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep every test away from the user's real config and debug log."""
    for key in list(os.environ):
        if key.startswith("MULTIQUANT_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("MULTIQUANT_DIR", str(tmp_path / "multiquant-home"))
    debug_module.reload_config()
    yield
    debug_module.reload_config()


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(12345)


@pytest.fixture
def blobs():
    """Three well separated 2-D clusters of ten points each, in cluster order."""
    gen = np.random.default_rng(7)
    means = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    points = np.concatenate([m + 0.3 * gen.standard_normal((10, 2)) for m in means])
    labels = np.repeat(np.arange(3), 10)
    return points, labels


@pytest.fixture
def write_csv():
    """Write numeric rows (and an optional header) as CSV."""

    def _write(path: Path, rows, header=None) -> Path:
        lines = []
        if header is not None:
            lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write
