"""Tests for the Typer command surface."""

import csv
import json

import pytest
from typer.testing import CliRunner

from qchain.cli import EXIT_CHECK_FAILED, EXIT_USAGE, app, main
from tests.test_data.sample_data import KL_THREE_QUARTERS


@pytest.fixture
def runner():
    # click < 8.2 mixes stderr into stdout unless asked not to
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


def _payload(result):
    return json.loads(result.stdout)


def _error(result):
    return json.loads(result.stderr.strip().splitlines()[-1])


@pytest.mark.unit
class TestScalarCommands:
    def test_help(self, runner, cli_workdir):
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        assert "channel-div" in result.stdout

    def test_sandwiched(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app,
            ["div", "--kind", "sandwiched", "--alpha", "2", "--rho", str(instance_files["plus"]),
             "--sigma", str(instance_files["mixed"])],
        )
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["value_bits"] == pytest.approx(1.0, abs=1e-10)
        assert payload["diagnostics"]["support_violation"] is False

    def test_classical(self, runner, cli_workdir):
        result = runner.invoke(app, ["div", "--kind", "classical", "--alpha", "1", "--p", "[0.75,0.25]", "--q", "[0.5,0.5]"])
        assert result.exit_code == 0
        assert _payload(result)["value_bits"] == pytest.approx(KL_THREE_QUARTERS, abs=1e-11)

    def test_near_one_order_is_rejected(self, runner, cli_workdir):
        result = runner.invoke(app, ["div", "--kind", "classical", "--alpha", "1.00001", "--p", "[1]", "--q", "[1]"])
        assert result.exit_code == EXIT_USAGE
        assert _error(result)["error"] == "near_one_order"

    def test_missing_sigma(self, runner, cli_workdir, instance_files):
        result = runner.invoke(app, ["div", "--kind", "geometric", "--alpha", "2", "--rho", str(instance_files["plus"])])
        assert result.exit_code == EXIT_USAGE
        assert _error(result)["error"] == "config_error"

    def test_measured_is_a_lower_bound(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app,
            ["div", "--kind", "measured", "--alpha", "2", "--rho", str(instance_files["plus"]),
             "--sigma", str(instance_files["mixed"]), "--restarts", "1", "--refine-iters", "0"],
        )
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["diagnostics"]["lower_bound"] is True
        assert payload["value_bits"] <= 1.0 + 1e-9

    def test_entropy(self, runner, cli_workdir, instance_files):
        result = runner.invoke(app, ["entropy", "--rho", str(instance_files["mixed"]), "--alpha", "2"])
        assert result.exit_code == 0
        assert _payload(result) == {"entropy_bits": 1.0, "alpha": "2"}

    def test_pinch(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app, ["pinch", "--rho", str(instance_files["plus"]), "--sigma", str(instance_files["mixed"])]
        )
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["spec_count"] == 1
        assert payload["state"]["matrix"]["re"] == pytest.approx([[0.5, 0.5], [0.5, 0.5]])

    def test_matsumoto(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app, ["matsumoto", "--rho", str(instance_files["plus"]), "--sigma", str(instance_files["mixed"])]
        )
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["report"]["pass"] is True
        assert len(payload["lambdas"]) == len(payload["P"]) == len(payload["Q"])

    def test_missing_file(self, runner, cli_workdir):
        result = runner.invoke(app, ["entropy", "--rho", "absent.json", "--alpha", "2"])
        assert result.exit_code == EXIT_USAGE


@pytest.mark.unit
class TestChannelDiv:
    @pytest.fixture
    def base_args(self, instance_files):
        return [
            "channel-div",
            "--e", str(instance_files["identity"]),
            "--f", str(instance_files["depolarizing"]),
            "--alpha", "inf",
            "--restarts", "0",
            "--refine-iters", "0",
        ]

    def test_plain(self, runner, cli_workdir, base_args):
        result = runner.invoke(app, base_args)
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["value_bits"] == pytest.approx(1.0, abs=1e-9)
        assert payload["mode"] == "plain"
        assert payload["witness"]["dim"] == 2

    def test_stabilized(self, runner, cli_workdir, base_args):
        result = runner.invoke(app, base_args + ["--mode", "stab"])
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["value_bits"] == pytest.approx(2.0, abs=1e-9)
        assert payload["witness"]["dim"] == 4

    def test_regularized(self, runner, cli_workdir, base_args):
        result = runner.invoke(app, base_args + ["--regularize", "2"])
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["values"] == pytest.approx([1.0, 1.0], abs=1e-9)
        assert len(payload["estimates"]) == 2

    def test_regularized_amortized_is_rejected(self, runner, cli_workdir, base_args):
        result = runner.invoke(app, base_args + ["--regularize", "2", "--mode", "amortized"])
        assert result.exit_code == EXIT_USAGE
        assert _error(result)["error"] == "config_error"


@pytest.mark.unit
class TestVerifyCommands:
    def test_generated_instance(self, runner, cli_workdir):
        result = runner.invoke(app, ["verify", "pinching_inequality", "--dim", "2", "--seed", "1"])
        assert result.exit_code == 0
        assert _payload(result)["pass"] is True

    def test_instance_files(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app,
            ["verify", "sandwiched_chain", "--alpha", "2",
             "--rho", str(instance_files["plus"]), "--sigma", str(instance_files["mixed"]),
             "--e", str(instance_files["identity"]), "--f", str(instance_files["depolarizing"])],
        )
        assert result.exit_code == 0
        assert _payload(result)["pass"] is True

    def test_missing_operand(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app, ["verify", "matsumoto", "--rho", str(instance_files["plus"]), "--sigma", str(instance_files["mixed"])]
        )
        assert result.exit_code == EXIT_USAGE
        assert "--alpha" in _error(result)["message"]

    def test_unknown_check(self, runner, cli_workdir):
        result = runner.invoke(app, ["verify", "no_such_check"])
        assert result.exit_code == EXIT_USAGE
        assert _error(result)["error"] == "config_error"

    def test_campaign_report(self, runner, cli_workdir, write_json):
        config = write_json(
            "campaign.json",
            {
                "checks": ["pinching_inequality", "classical_reduction"],
                "trials": 1,
                "dims": [2],
                "orders": ["2"],
                "rng_seed": 11,
                "threads": 1,
                "search_restarts": 1,
                "search_refine_iters": 0,
                "measured_restarts": 1,
                "measured_refine_iters": 0,
            },
        )
        out = cli_workdir / "reports" / "report.csv"
        result = runner.invoke(app, ["campaign", "--config", str(config), "--out", str(out)])
        assert result.exit_code == 0
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 3
        assert {row[0] for row in rows[1:]} == {"pinching_inequality", "classical_reduction"}

    def test_explore_conjecture_never_gates(self, runner, cli_workdir, instance_files):
        result = runner.invoke(
            app,
            ["explore-conjecture", "--alpha", "2", "--n", "1", "--restarts", "0",
             "--rho", str(instance_files["plus"]), "--sigma", str(instance_files["mixed"]),
             "--e", str(instance_files["identity"]), "--f", str(instance_files["depolarizing"])],
        )
        assert result.exit_code == 0
        payload = _payload(result)
        assert payload["exploration"] is True
        assert [level["n"] for level in payload["levels"]] == [1]


@pytest.mark.unit
class TestConfigCommands:
    def test_set_and_show(self, runner, cli_workdir, temp_config):
        assert runner.invoke(app, ["config", "set", "search.restarts=5"]).exit_code == 0
        assert temp_config.exists()
        assert runner.invoke(app, ["config", "show"]).exit_code == 0

    def test_set_rejects_bad_value(self, runner, cli_workdir, temp_config):
        result = runner.invoke(app, ["config", "set", "search.restarts=many"])
        assert result.exit_code == EXIT_USAGE
        assert not temp_config.exists()

    def test_reset(self, runner, cli_workdir, temp_config):
        runner.invoke(app, ["config", "set", "search.restarts=5"])
        assert runner.invoke(app, ["config", "reset"]).exit_code == 0


@pytest.mark.unit
class TestMain:
    def test_success(self, cli_workdir, capsys):
        assert main(["entropy", "--help"]) == 0

    def test_usage_error(self, cli_workdir, capsys):
        assert main(["div"]) == EXIT_USAGE

    def test_failed_check(self, cli_workdir, capsys, mocker):
        from qchain.core.verify import CheckResult

        failing = CheckResult(name="pinching_inequality", lhs_bits=2.0, rhs_bits=1.0, slack=-1.0, passed=False, tol=1e-7)
        mocker.patch("qchain.cli.verify_commands.run_check", return_value=failing)
        assert main(["verify", "pinching_inequality"]) == EXIT_CHECK_FAILED
