import json
import pytest

from afffp.cli import EXIT_CONFIG, EXIT_OK, EXIT_OUTPUT, EXIT_RUN, EXIT_USAGE, cli_main, resolve_config
from afffp.io import read_csv_config


def run(tmp_path, *argv, out="out"):
    return cli_main(list(argv) + ["--out", str(tmp_path / out)])


def test_climbing_summary_and_round_trip(tmp_path, capsys):
    assert run(tmp_path, "climbing", "--algorithm", "afffp", "--steps", "60",
               "--replications", "5", "--seed", "7") == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line.startswith("climbing afffp: overall mean payoff")
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert "overall_mean_payoff" in summary and summary["config"]["seed"] == 7
    config = tmp_path / "out" / "config.json"
    assert cli_main(["climbing", "--config", str(config), "--out", str(tmp_path / "again")]) == EXIT_OK
    for name in ("replications.csv", "summary.json"):
        assert (tmp_path / "out" / name).read_bytes() == (tmp_path / "again" / name).read_bytes()


def test_csv_outputs_embed_config_and_use_lf(tmp_path):
    assert run(tmp_path, "track", "--horizon", "20", "--seed", "3") == EXIT_OK
    path = tmp_path / "out" / "track.csv"
    raw = path.read_bytes()
    assert b"\r" not in raw
    cfg = read_csv_config(path)
    assert cfg["seed"] == 3 and cfg["horizon"] == 20


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"steps": 40, "replications": 3, "seed": 1}))
    assert cli_main(["climbing", "--config", str(cfg), "--seed", "2",
                     "--out", str(tmp_path / "o")]) == EXIT_OK
    written = json.loads((tmp_path / "o" / "config.json").read_text())
    assert written["seed"] == 2 and written["steps"] == 40


def test_full_scale_counts():
    assert resolve_config("climbing", {}, {})["replications"] == 200
    assert resolve_config("climbing", {}, {"full_scale": True})["replications"] == 1000
    assert resolve_config("disaster", {}, {"full_scale": True})["trials"] == 200
    assert resolve_config("vta", {}, {})["instances"] == 30


def test_unknown_flag(tmp_path, capsys):
    assert run(tmp_path, "climbing", "--bogus", "1") == EXIT_USAGE
    assert cli_main([]) == EXIT_USAGE


def test_schema_violation(tmp_path):
    assert run(tmp_path, "climbing", "--xi", "-1") == EXIT_CONFIG
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"steps": 10, "colour": "red"}))
    assert cli_main(["climbing", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    cfg.write_text("{not json")
    assert cli_main(["climbing", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o").exists()


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli_main(["solve", "--out", str(blocker / "sub")]) == EXIT_OUTPUT


def test_run_failure_exit_code(tmp_path, capsys):
    assert run(tmp_path, "track", "--opponent", "jump", "--lambda0", "0.1", "--gamma", "0") == EXIT_RUN
    assert "step 751" in capsys.readouterr().err


def test_solve_round_trip(tmp_path):
    assert run(tmp_path, "solve", "--seed", "3", "--ambulances", "6") == EXIT_OK
    first = json.loads((tmp_path / "out" / "solution.json").read_text())
    inst = tmp_path / "out" / "instance.json"
    assert cli_main(["solve", "--instance", str(inst), "--out", str(tmp_path / "b")]) == EXIT_OK
    second = json.loads((tmp_path / "b" / "solution.json").read_text())
    assert first["assignment"] == second["assignment"] and first["objective"] == second["objective"]


def test_sweep_vta_disaster_commands(tmp_path):
    assert run(tmp_path, "sweep", "--reduced", "--reps", "2", "--horizon", "100", out="s") == EXIT_OK
    rows = (tmp_path / "s" / "sweep_mse.csv").read_text().strip().split("\n")
    assert rows[0].startswith("# config:") and len(rows) == 12
    assert run(tmp_path, "vta", "--instances", "2", "--steps", "5", "--vehicles", "4",
               "--targets", "3", out="v") == EXIT_OK
    assert (tmp_path / "v" / "vta_curves.csv").exists()
    assert run(tmp_path, "disaster", "--trials", "2", "--steps", "50", "--ambulances", "5",
               out="d") == EXIT_OK
    text = (tmp_path / "d" / "disaster_metrics.csv").read_text()
    assert "afffp,50," in text and "geometric,50," in text
