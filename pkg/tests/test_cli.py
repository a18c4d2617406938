"""CLI behavior: exit codes, scenario resolution, fit and report commands."""

import os

import pytest

from viewaudit.cli import main


def test_unknown_scenario_usage_error(capsys):
    assert main(["run", "nosuch", "--out", "/tmp/never-used"]) == 2
    err = capsys.readouterr().err
    assert "unknown scenario" in err and "behaviors" in err


def test_run_single_scenario(tmp_path, capsys):
    code = main(["run", "ip-blacklisting", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "[ok] ip-blacklisting" in out
    assert (tmp_path / "ip-blacklisting" / "report" / "ip-blacklisting.csv").exists()
    assert (tmp_path / "ip-blacklisting" / "report" / "metrics.csv").exists()


def test_run_decay_curve_prints_fit(tmp_path, capsys):
    code = main(["run", "decay-curve", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "fitted: threshold=8" in out
    assert "rate=0.45" in out


def test_fit_command(tmp_path, capsys):
    assert main(["run", "decay-curve", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    code = main(["fit", "--log", str(tmp_path / "decay-curve")])
    out = capsys.readouterr().out
    assert code == 0
    assert "threshold_est=8" in out
    assert (tmp_path / "decay-curve" / "fit.csv").exists()


def test_fit_without_sweep_fails(tmp_path, capsys):
    assert main(["run", "ip-blacklisting", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    code = main(["fit", "--log", str(tmp_path / "ip-blacklisting")])
    assert code == 1
    assert "fit error" in capsys.readouterr().err


def test_report_empty_dir_fails(tmp_path, capsys):
    empty = tmp_path / "nothing"
    empty.mkdir()
    assert main(["report", "--log", str(empty)]) == 2
    assert "no scenario logs" in capsys.readouterr().err


def test_report_plotdata(tmp_path, capsys):
    assert main(["run", "behaviors", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    code = main(["report", "--log", str(tmp_path), "--format", "plotdata"])
    out = capsys.readouterr().out
    assert code == 0
    assert "behaviors.plot.tsv" in out


def test_env_var_default_out(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VIEWAUDIT_OUT", str(tmp_path / "from-env"))
    assert main(["run", "ip-blacklisting"]) == 0
    capsys.readouterr()
    assert (tmp_path / "from-env" / "ip-blacklisting").is_dir()


def test_seed_override(tmp_path, capsys):
    code = main(["run", "ip-blacklisting", "--seed", "777", "--out", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    assert (tmp_path / "ip-blacklisting" / "seed-777").is_dir()


def test_config_override(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text('{"ip-blacklisting": {"seeds": [4242]}}')
    code = main([
        "run", "ip-blacklisting", "--out", str(tmp_path / "out"),
        "--config", str(config),
    ])
    capsys.readouterr()
    assert code == 0
    assert (tmp_path / "out" / "ip-blacklisting" / "seed-4242").is_dir()
