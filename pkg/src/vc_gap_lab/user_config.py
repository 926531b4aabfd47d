"""User-level defaults for vc-gap-lab runs.

Reads from ~/.config/vc-gap-lab/config.yaml. Values there sit below
environment variables and command-line flags.
"""

import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any

import yaml

from vc_gap_lab.models import OutputFormat

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.home() / ".config" / "vc-gap-lab"
CONFIG_FILE = CONFIG_DIR / "config.yaml"
THREADS_ENV = "VC_GAP_LAB_THREADS"

# Keys that map to enum types for validation
_ENUM_FIELDS: dict[str, type[Enum]] = {
    "output_format": OutputFormat,
}

# Keys with numeric values and their type
_NUMERIC_FIELDS: dict[str, type] = {
    "tolerance": float,
    "seed": int,
    "workers": int,
    "pentagonal_sample_size": int,
}


def get_config_path() -> Path:
    """Return the path to the user config file."""
    return CONFIG_FILE


def load_user_config() -> dict[str, Any]:
    """Load user configuration from disk.

    Returns an empty dict if the file doesn't exist or is invalid.
    """
    config_path = get_config_path()
    if not config_path.exists():
        return {}

    try:
        with open(config_path) as f:
            data = yaml.safe_load(f) or {}
    except Exception as e:
        logger.warning(f"Failed to load user config from {config_path}: {e}")
        return {}

    if not isinstance(data, dict):
        logger.warning(f"User config is not a mapping: {config_path}")
        return {}

    validated: dict[str, Any] = {}
    for key, value in data.items():
        if value is None:
            continue
        if key in _ENUM_FIELDS:
            try:
                _ENUM_FIELDS[key](value)
            except ValueError:
                valid = [e.value for e in _ENUM_FIELDS[key]]
                logger.warning(
                    f"Invalid value '{value}' for '{key}' in user config. Valid: {valid}"
                )
                continue
        elif key in _NUMERIC_FIELDS:
            kind = _NUMERIC_FIELDS[key]
            if isinstance(value, bool) or not isinstance(value, int | float):
                logger.warning(f"Invalid value '{value}' for '{key}' in user config")
                continue
            if kind is int and not float(value).is_integer():
                logger.warning(f"'{key}' must be an integer in user config, got {value}")
                continue
            value = kind(value)
        else:
            logger.warning(f"Unknown key '{key}' in user config ignored")
            continue
        validated[key] = value

    return validated


def save_user_config(config: dict[str, Any]) -> Path:
    """Save configuration to the user config file.

    Returns the path written to.
    """
    config_path = get_config_path()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w") as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)
    return config_path


def get_default_config_template() -> dict[str, Any]:
    """Return the built-in defaults as a config mapping."""
    return {
        "tolerance": 1e-9,
        "seed": 0,
        "output_format": "json",
        "workers": 1,
        "pentagonal_sample_size": 1_000_000,
    }


def env_workers() -> int | None:
    """Worker count from VC_GAP_LAB_THREADS, if set to a positive integer."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        workers = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {THREADS_ENV}={raw!r}: not an integer")
        return None
    if workers < 1:
        logger.warning(f"Ignoring {THREADS_ENV}={raw!r}: must be positive")
        return None
    return workers


def effective_defaults() -> dict[str, Any]:
    """Built-in defaults overlaid with the user config and the environment."""
    result = get_default_config_template()
    result.update(load_user_config())
    workers = env_workers()
    if workers is not None:
        result["workers"] = workers
    return result
