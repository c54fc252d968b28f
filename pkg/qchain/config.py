"""User configuration for qchain tolerances and search settings."""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from qchain.core.constants import (
    CHECK_TOL,
    CLUSTER_TOL,
    DEFAULT_REFINE_ITERS,
    DEFAULT_RESTARTS,
)
from qchain.core.errors import ConfigError

CONFIG_DIR = Path.home() / ".config" / "qchain"
CONFIG_PATH = CONFIG_DIR / "config.yaml"

THREADS_ENV = "QCHAIN_THREADS"
LOG_FILE_ENV = "QCHAIN_LOG_FILE"

DEFAULT_CONFIG: dict[str, dict[str, Any]] = {
    "tolerances": {
        "cluster_tol": CLUSTER_TOL,
        "check_tol": CHECK_TOL,
    },
    "search": {
        "restarts": DEFAULT_RESTARTS,
        "refine_iters": DEFAULT_REFINE_ITERS,
    },
    "logging": {
        "file": "qchain.log",
    },
}


@dataclass
class SearchConfig:
    """Default effort for channel-divergence searches."""

    restarts: int
    refine_iters: int


def _merge_defaults(config: dict) -> dict:
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for section, values in (config or {}).items():
        if isinstance(values, dict) and section in merged:
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


def load_config() -> dict:
    """Load config from file merged over the defaults."""
    if not CONFIG_PATH.exists():
        return copy.deepcopy(DEFAULT_CONFIG)

    try:
        with open(CONFIG_PATH) as f:
            config = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError):
        config = {}

    return _merge_defaults(config)


def save_config(config: dict) -> None:
    """Persist config to file."""
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    with open(CONFIG_PATH, "w") as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)


def reset_config() -> None:
    """Reset config to defaults."""
    save_config(copy.deepcopy(DEFAULT_CONFIG))


def set_config_value(key: str, value: str) -> Any:
    """Set ``section.name`` to ``value``, coerced to the type of the default.

    Raises:
        ConfigError: for unknown keys or values of the wrong type.
    """
    section, _, name = key.partition(".")
    if section not in DEFAULT_CONFIG or name not in DEFAULT_CONFIG[section]:
        known = ", ".join(f"{s}.{n}" for s, values in DEFAULT_CONFIG.items() for n in values)
        raise ConfigError(f"unknown config key '{key}'; known: {known}")

    kind = type(DEFAULT_CONFIG[section][name])
    try:
        parsed = kind(value)
    except ValueError as exc:
        raise ConfigError(f"'{key}' expects a {kind.__name__}, got '{value}'") from exc
    if isinstance(parsed, str):
        if not parsed:
            raise ConfigError(f"'{key}' must not be empty")
    elif parsed < 0:
        raise ConfigError(f"'{key}' must be non-negative")

    config = load_config()
    config[section][name] = parsed
    save_config(config)
    return parsed


def get_search_config() -> SearchConfig:
    search = load_config()["search"]
    return SearchConfig(restarts=int(search["restarts"]), refine_iters=int(search["refine_iters"]))


def get_tolerance(name: str) -> float:
    return float(load_config()["tolerances"][name])


def get_thread_count() -> int:
    """Parallel trial workers: ``QCHAIN_THREADS`` if set, else the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got '{raw}'") from exc
        if threads < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got '{raw}'")
        return threads
    return os.cpu_count() or 1


def get_log_file() -> Path:
    """Log file path: ``QCHAIN_LOG_FILE`` if set, else ``logging.file`` from the config."""
    raw = os.environ.get(LOG_FILE_ENV)
    if raw:
        return Path(raw).expanduser()
    return Path(str(load_config()["logging"]["file"])).expanduser()
