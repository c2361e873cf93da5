"""Configuration management.

Resolution order, lowest first: built-in defaults, ``config.json``, its
``env`` section, then ``MULTIQUANT_*`` shell variables. CLI flags are applied
by the commands on top of all of these.
"""

import json
import os
from pathlib import Path
from typing import Any, Optional

from multiquant.utils.constants import (
    DEFAULT_CENTER_MAX_ITERS,
    DEFAULT_CENTER_TOL,
    DEFAULT_GRID_SIZE,
    DEFAULT_MAX_ITERS,
    DEFAULT_REL_TOL,
    DEFAULT_RESTARTS,
    DEFAULT_TRIALS,
)

ENV_PREFIX = "MULTIQUANT_"

# attr_name -> built-in default; the type of the default drives coercion
_DEFAULTS: dict[str, Any] = {
    "debug": False,
    "threads": 0,
    "restarts": DEFAULT_RESTARTS,
    "max_iters": DEFAULT_MAX_ITERS,
    "rel_tol": DEFAULT_REL_TOL,
    "center_tol": DEFAULT_CENTER_TOL,
    "center_max_iters": DEFAULT_CENTER_MAX_ITERS,
    "trials": DEFAULT_TRIALS,
    "grid_size": DEFAULT_GRID_SIZE,
}


def get_multiquant_dir() -> Path:
    """Get the multiquant data directory (XDG-compliant)."""
    if env_dir := os.environ.get("MULTIQUANT_DIR"):
        return Path(env_dir)
    return Path.home() / ".config" / "multiquant"


def _coerce(default: Any, raw: str) -> Any:
    """Parse an environment string to the type of ``default``; raises ValueError."""
    if isinstance(default, bool):
        return raw.strip().lower() in ("true", "1", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


class Config:
    """Application configuration."""

    # Settings persisted to config.json (attr_name -> description)
    SETTINGS: dict[str, str] = {
        "debug": "Log to ~/.config/multiquant/debug.log",
        "threads": "Worker cap for restarts and trials (0 = all cores)",
        "restarts": "Multistart count for Lloyd fits",
        "max_iters": "Lloyd iteration cap",
        "rel_tol": "Relative distortion decrease that stops Lloyd",
        "center_tol": "Relative gradient tolerance of the center solver",
        "center_max_iters": "Iteration cap of the center solver",
        "trials": "Monte Carlo trials per experiment",
        "grid_size": "Grid points used to tabulate point densities",
    }

    def __init__(self, multiquant_dir: Optional[Path] = None):
        self.multiquant_dir = multiquant_dir or get_multiquant_dir()
        self._config_file = self.multiquant_dir / "config.json"
        self.env: dict[str, str] = {}
        for attr, default in _DEFAULTS.items():
            setattr(self, attr, default)
        self._load_file()
        self._apply_env(self.env)
        self._apply_env({k: v for k, v in os.environ.items() if k.startswith(ENV_PREFIX)})

    def _load_file(self):
        if not self._config_file.exists():
            return
        try:
            data = json.loads(self._config_file.read_text())
        except (json.JSONDecodeError, OSError):
            return
        if not isinstance(data, dict):
            return
        for attr in self.SETTINGS:
            if attr in data:
                setattr(self, attr, data[attr])
        env = data.get("env", {})
        self.env = dict(env) if isinstance(env, dict) else {}

    def _apply_env(self, env: dict[str, str]):
        """Apply ``MULTIQUANT_FOO`` or bare ``FOO`` keys; unknown keys and bad values are skipped."""
        for key, raw in env.items():
            attr = key[len(ENV_PREFIX) :] if key.startswith(ENV_PREFIX) else key
            attr = attr.lower()
            if attr not in self.SETTINGS:
                continue
            try:
                setattr(self, attr, _coerce(_DEFAULTS[attr], str(raw)))
            except ValueError:
                pass

    def as_dict(self) -> dict[str, Any]:
        """Current values of all persisted settings."""
        return {attr: getattr(self, attr) for attr in self.SETTINGS}

    def save(self):
        """Save config to file."""
        self.multiquant_dir.mkdir(parents=True, exist_ok=True)
        data = self.as_dict()
        data["env"] = self.env
        self._config_file.write_text(json.dumps(data, indent=2))

    def set_debug(self, enabled: bool):
        """Enable or disable debug mode."""
        self.debug = enabled
        self.save()

    def get_debug(self) -> bool:
        return self.debug

    def effective_threads(self, override: Optional[int] = None) -> int:
        """Resolve the worker cap; 0 means all available cores."""
        threads = override if override is not None else self.threads
        if not threads or threads < 1:
            return os.cpu_count() or 1
        return int(threads)

    @property
    def log_path(self) -> Path:
        """Path to the debug log."""
        return self.multiquant_dir / "debug.log"
