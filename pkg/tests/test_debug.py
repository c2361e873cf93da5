"""Tests for debug logging."""

import json

from multiquant.utils import debug as debug_module
from multiquant.utils.debug import debug, debug_fit, log_error


def _enable(mq_dir):
    (mq_dir / "config.json").write_text(json.dumps({"debug": True}))
    debug_module.reload_config()


def test_debug_silent_when_disabled(mock_multiquant_dir, capsys):
    """Nothing is written while debug mode is off."""
    debug_module.reload_config()
    debug("fit", "hidden")

    assert capsys.readouterr().err == ""
    assert not (mock_multiquant_dir / "debug.log").exists()


def test_debug_writes_log_and_stderr(mock_multiquant_dir, capsys):
    """Enabled debug lines carry category and key=value pairs."""
    _enable(mock_multiquant_dir)
    debug_fit("iteration", iteration=3, distortion=0.5)

    line = (mock_multiquant_dir / "debug.log").read_text()
    assert "[multiquant:fit]" in line
    assert "iteration=3 distortion=0.5" in line
    assert "[multiquant:fit]" in capsys.readouterr().err


def test_log_error_always_logs(mock_multiquant_dir, capsys):
    """Errors are logged with a traceback even when debug is off."""
    debug_module.reload_config()
    try:
        raise ValueError("boom")
    except ValueError as exc:
        log_error("cli", "command failed", exc)

    text = (mock_multiquant_dir / "debug.log").read_text()
    assert "ERROR: command failed" in text
    assert "ValueError: boom" in text
    assert "ERROR" in capsys.readouterr().err
