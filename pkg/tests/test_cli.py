import json
import math
import os
import time
from pathlib import Path

import pytest

from pmsim.cli import EXPERIMENTS, list_experiments, main
from pmsim.defaults import DEFAULTS_ENV_VAR, load_defaults

CONFIG_DIR = Path(__file__).resolve().parents[1] / "demos" / "configs"


def run_cli(*argv):
    return main(list(argv))


class TestList:
    def test_seven_experiments(self):
        assert len(EXPERIMENTS) == 7
        table = list_experiments()
        for name in EXPERIMENTS:
            assert name in table

    def test_rows_name_schema_files(self):
        table = list_experiments()
        for exp in EXPERIMENTS.values():
            assert exp.schema_file in table

    def test_output_stable_across_calls(self):
        assert list_experiments() == list_experiments()

    def test_list_command_exits_zero(self, capsys):
        assert run_cli("list") == 0
        out = capsys.readouterr().out
        assert "protective" in out


class TestValidation:
    def test_unknown_experiment(self, capsys):
        assert run_cli("run", "teleportation") == 2
        assert "unknown experiment" in capsys.readouterr().err

    def test_missing_schedule_t_names_field(self, tmp_path, capsys):
        config = {
            "version": 1,
            "experiment": "protective",
            "parameters": {
                "state": {"bloch": [0.0, 0.0, 1.0]},
                "observable": "Z",
                "schedule": {"envelope": "sin2"},
            },
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(config))
        assert run_cli("run", "--config", str(path)) == 2
        err = capsys.readouterr().err
        assert "schedule" in err and "'T'" in err

    def test_schema_violation_names_field(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(
            json.dumps(
                {
                    "version": 1,
                    "experiment": "ensemble",
                    "parameters": {"N": 3, "trials": 10},
                }
            )
        )
        assert run_cli("run", "--config", str(path)) == 2
        assert "N" in capsys.readouterr().err

    def test_missing_config_file_is_runtime_error(self, capsys):
        assert run_cli("run", "protective", "--config", "/nonexistent.json") == 1

    def test_experiment_conflict(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"experiment": "beam-merge", "parameters": {}}))
        assert run_cli("run", "frequency", "--config", str(path)) == 2
        assert "conflicts" in capsys.readouterr().err


class TestRun:
    def test_protective_config_estimate_close_to_exact(self, tmp_path, capsys):
        out = tmp_path / "out.json"
        code = run_cli(
            "run",
            "protective",
            "--config",
            str(CONFIG_DIR / "qubit_sx.json"),
            "--out",
            str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        result = payload["result"]
        assert result["exact"] == pytest.approx(0.5 / math.sqrt(1.25), abs=1e-12)
        assert abs(result["estimate"] - result["exact"]) <= 1e-2
        assert payload["experiment"] == "protective"

    def test_flag_overrides_without_config(self, tmp_path):
        out = tmp_path / "ens.json"
        code = run_cli(
            "run",
            "ensemble",
            "--N",
            "10",
            "--trials",
            "50",
            "--seed",
            "7",
            "--out",
            str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["seed"] == 7
        assert payload["result"]["N"] == 10
        assert payload["result"]["z_prepared"]["empirical_std"] == 0.0

    def test_dotted_override_reaches_nested_field(self, tmp_path):
        out = tmp_path / "freq.json"
        code = run_cli(
            "run",
            "frequency",
            "--weights",
            "[0.5, 0.5]",
            "--N_ladder",
            "[6, 60]",
            "--n_draws",
            "2",
            "--out",
            str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["result"]["rows"][0]["distance"] == pytest.approx(0.25)

    def test_seeded_rerun_is_byte_identical(self, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        argv = ["run", "ensemble", "--N", "100", "--trials", "10000", "--seed", "7"]
        assert run_cli(*argv, "--out", str(out_a)) == 0
        assert run_cli(*argv, "--out", str(out_b)) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_csv_format(self, tmp_path):
        out = tmp_path / "ladder.csv"
        code = run_cli(
            "run",
            "frequency",
            "--weights",
            "[0.5, 0.5]",
            "--N_ladder",
            "[6, 60, 600]",
            "--n_draws",
            "2",
            "--format",
            "csv",
            "--out",
            str(out),
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "N,distance"
        assert len(lines) == 4

    def test_csv_rerun_byte_identical(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            assert (
                run_cli(
                    "run",
                    "ensemble",
                    "--N",
                    "50",
                    "--trials",
                    "200",
                    "--seed",
                    "3",
                    "--include_trials",
                    "true",
                    "--format",
                    "csv",
                    "--out",
                    str(path),
                )
                == 0
            )
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_beam_merge_runs_without_parameters(self, tmp_path):
        out = tmp_path / "bm.json"
        assert run_cli("run", "beam-merge", "--out", str(out)) == 0
        payload = json.loads(out.read_text())
        assert payload["result"]["trace_distances"]["spin"] <= 1e-12

    def test_entropy_report_mode(self, tmp_path):
        out = tmp_path / "s.json"
        code = run_cli(
            "run",
            "entropy",
            "--mode",
            "report",
            "--rho",
            "[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]",
            "--out",
            str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["result"]["S_nats"] == pytest.approx(math.log(2), abs=1e-12)


class TestShippedConfigs:
    @pytest.mark.parametrize("config", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.name)
    def test_runs_to_exit_zero_under_time_budget(self, config, tmp_path):
        out = tmp_path / (config.stem + ".json")
        start = time.monotonic()
        assert run_cli("run", "--config", str(config), "--out", str(out)) == 0
        assert time.monotonic() - start < 60.0
        assert out.exists()


class TestDefaultsTable:
    def test_packaged_defaults(self):
        defaults = load_defaults()
        assert defaults["gap"] == 1.0
        assert defaults["grid_points"] == 128
        assert defaults["mass"] == 1e6

    def test_env_var_override(self, tmp_path, monkeypatch):
        table = dict(load_defaults())
        table["grid_points"] = 64
        path = tmp_path / "alt.json"
        path.write_text(json.dumps(table))
        monkeypatch.setenv(DEFAULTS_ENV_VAR, str(path))
        assert load_defaults()["grid_points"] == 64
