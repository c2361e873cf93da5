"""Debug logging utility.

Lines look like ``[multiquant:fit] 2024-05-01 12:00:00.123 restart done | n=8 distortion=0.0213``
and go to ``debug.log`` in the multiquant directory and to stderr. Command
results never pass through here.
"""

import sys
import traceback
from datetime import datetime
from typing import Any, Optional

import numpy as np

from multiquant.utils.config import Config, get_multiquant_dir

_config: Optional[Config] = None


def _get_config() -> Config:
    """Get cached config instance."""
    global _config
    if _config is None:
        _config = Config(get_multiquant_dir())
    return _config


def reload_config():
    """Reload config (call after debug mode changes)."""
    global _config
    _config = None


def debug_enabled() -> bool:
    """Whether debug lines are currently emitted."""
    return bool(_get_config().debug)


def _value(v: Any) -> str:
    # Arrays can be huge; only their shape is useful in a log line
    if isinstance(v, np.ndarray):
        return f"array{v.shape}"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def _line(category: str, message: str, extras: dict[str, Any]) -> str:
    stamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]
    line = f"[multiquant:{category}] {stamp} {message}"
    if extras:
        line += " | " + " ".join(f"{k}={_value(v)}" for k, v in extras.items())
    return line


def _emit(line: str) -> None:
    """Append to the debug log and echo on stderr; never raises."""
    try:
        log_path = _get_config().log_path
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "a") as f:
            f.write(line + "\n")
    except Exception:
        pass
    try:
        print(line, file=sys.stderr)
    except BrokenPipeError:
        pass


def debug(category: str, message: str, **kwargs):
    """Log debug message if debug mode is enabled.

    Args:
        category: One of 'fit', 'center', 'quad', 'experiment', 'io', 'cli'
        message: Debug message
        **kwargs: Additional key=value pairs to log
    """
    if debug_enabled():
        _emit(_line(category, message, kwargs))


def debug_fit(message: str, **kwargs):
    debug("fit", message, **kwargs)


def debug_center(message: str, **kwargs):
    debug("center", message, **kwargs)


def debug_quad(message: str, **kwargs):
    debug("quad", message, **kwargs)


def debug_experiment(message: str, **kwargs):
    debug("experiment", message, **kwargs)


def debug_io(message: str, **kwargs):
    debug("io", message, **kwargs)


def log_error(category: str, message: str, exc: Optional[BaseException] = None):
    """Log an error even when debug mode is off, with the traceback of ``exc``."""
    line = _line(category, f"ERROR: {message}", {})
    if exc is not None:
        line += "\n" + "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))
    _emit(line)
