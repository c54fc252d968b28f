from pathlib import Path

import pytest
import yaml

from qchain import config as config_module
from qchain.config import (
    DEFAULT_CONFIG,
    get_log_file,
    get_search_config,
    get_thread_count,
    get_tolerance,
    load_config,
    reset_config,
    set_config_value,
)
from qchain.core.constants import DEFAULT_RESTARTS
from qchain.core.errors import ConfigError


@pytest.mark.unit
class TestConfigFile:
    def test_defaults_without_file(self, temp_config):
        assert not temp_config.exists()
        assert load_config() == DEFAULT_CONFIG

    def test_set_value_persists(self, temp_config):
        assert set_config_value("search.restarts", "8") == 8
        saved = yaml.safe_load(temp_config.read_text())
        assert saved["search"]["restarts"] == 8
        assert get_search_config().restarts == 8

    def test_float_values(self, temp_config):
        set_config_value("tolerances.check_tol", "1e-9")
        assert get_tolerance("check_tol") == 1e-9

    def test_partial_file_merges_defaults(self, temp_config):
        temp_config.parent.mkdir(parents=True)
        temp_config.write_text("search:\n  refine_iters: 10\n")
        search = get_search_config()
        assert search.refine_iters == 10
        assert search.restarts == DEFAULT_CONFIG["search"]["restarts"]

    def test_corrupt_file_falls_back(self, temp_config):
        temp_config.parent.mkdir(parents=True)
        temp_config.write_text("search: [unclosed\n")
        assert load_config() == DEFAULT_CONFIG

    def test_reset(self, temp_config):
        set_config_value("search.restarts", "1")
        reset_config()
        assert load_config() == DEFAULT_CONFIG

    def test_defaults_are_not_mutated(self, temp_config):
        set_config_value("search.restarts", "3")
        assert config_module.DEFAULT_CONFIG["search"]["restarts"] == DEFAULT_RESTARTS
        assert load_config()["search"]["restarts"] == 3

    @pytest.mark.parametrize(
        "key,value",
        [
            ("search.nope", "1"),
            ("unknown.restarts", "1"),
            ("search", "1"),
            ("search.restarts", "many"),
            ("search.restarts", "2.5"),
            ("tolerances.cluster_tol", "-1e-3"),
            ("logging.file", ""),
        ],
    )
    def test_rejects_bad_values(self, temp_config, key, value):
        with pytest.raises(ConfigError):
            set_config_value(key, value)
        assert not temp_config.exists()


@pytest.mark.unit
class TestLogFile:
    def test_default(self, temp_config, monkeypatch):
        monkeypatch.delenv("QCHAIN_LOG_FILE", raising=False)
        assert get_log_file() == Path("qchain.log")

    def test_config_key(self, temp_config, monkeypatch):
        monkeypatch.delenv("QCHAIN_LOG_FILE", raising=False)
        assert set_config_value("logging.file", "logs/runs.log") == "logs/runs.log"
        assert get_log_file() == Path("logs/runs.log")

    def test_environment_wins(self, temp_config, monkeypatch, tmp_path):
        set_config_value("logging.file", "logs/runs.log")
        monkeypatch.setenv("QCHAIN_LOG_FILE", str(tmp_path / "env.log"))
        assert get_log_file() == tmp_path / "env.log"


@pytest.mark.unit
class TestThreadCount:
    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("QCHAIN_THREADS", "3")
        assert get_thread_count() == 3

    def test_cpu_count_fallback(self, monkeypatch):
        monkeypatch.delenv("QCHAIN_THREADS", raising=False)
        monkeypatch.setattr("qchain.config.os.cpu_count", lambda: None)
        assert get_thread_count() == 1

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_invalid_values(self, monkeypatch, raw):
        monkeypatch.setenv("QCHAIN_THREADS", raw)
        with pytest.raises(ConfigError):
            get_thread_count()
