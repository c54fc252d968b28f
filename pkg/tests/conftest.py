import json
from pathlib import Path

import numpy as np
import pytest

from qchain.core.quantum import (
    depolarizing_map,
    identity_map,
    maximally_mixed,
    pure_state,
)
from qchain.core.serialization import dump_channel, dump_state
from qchain.logging_config import reset_logging

# Test data and fixtures


@pytest.fixture(autouse=True)
def _reset_logging():
    """Every test starts with unconfigured loguru sinks."""
    yield
    reset_logging()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def plus_state():
    """|+><+| on a qubit."""
    return pure_state([1.0, 1.0])


@pytest.fixture
def mixed_qubit():
    return maximally_mixed(2)


@pytest.fixture
def temp_config(tmp_path, monkeypatch):
    """Point the user config at a throwaway directory."""
    config_dir = tmp_path / "config"
    monkeypatch.setattr("qchain.config.CONFIG_DIR", config_dir)
    monkeypatch.setattr("qchain.config.CONFIG_PATH", config_dir / "config.yaml")
    return config_dir / "config.yaml"


@pytest.fixture
def cli_workdir(tmp_path, monkeypatch, temp_config):
    """Run CLI commands in a temp directory so the log file stays out of the repo."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QCHAIN_THREADS", raising=False)
    return tmp_path


@pytest.fixture
def instance_files(tmp_path, plus_state, mixed_qubit):
    """State and channel JSON files for the closed-form qubit instance."""
    paths = {
        "plus": tmp_path / "plus.json",
        "mixed": tmp_path / "mixed.json",
        "identity": tmp_path / "identity.json",
        "depolarizing": tmp_path / "depolarizing.json",
    }
    dump_state(plus_state, paths["plus"])
    dump_state(mixed_qubit, paths["mixed"])
    dump_channel(identity_map(2), paths["identity"])
    dump_channel(depolarizing_map(2), paths["depolarizing"])
    return paths


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path."""

    def _write(name: str, payload) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return _write
