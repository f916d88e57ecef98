"""Command line behavior and exit codes."""

import os

import pytest

from bowls.cli import cli_main


def read_data_rows(path):
    with open(path, encoding="utf-8") as handle:
        return [l for l in handle.read().splitlines()[2:] if l]


class TestList:
    def test_lists_problems_and_methods(self, capsys):
        assert cli_main(["list"]) == 0
        out = capsys.readouterr().out
        for tag in ("price", "branin", "cosine-mixture", "trid", "hartmann6",
                    "ackley-2", "ackley-4", "pima-logistic"):
            assert tag in out
        for method in ("bowls", "bo", "multistart", "mlsl"):
            assert method in out


class TestRun:
    def test_branin_two_trials(self, tmp_path, capsys):
        out_dir = str(tmp_path / "res")
        code = cli_main([
            "run", "--problem", "branin", "--method", "bowls",
            "--trials", "2", "--seed", "7", "--out", out_dir,
        ])
        assert code == 0
        rows = read_data_rows(os.path.join(out_dir, "trace.csv"))
        # each trial stops at the target after its first local search
        assert len(rows) == 2

    def test_unknown_problem_exits_1(self, tmp_path, capsys):
        code = cli_main([
            "run", "--problem", "nosuch", "--method", "bowls",
            "--out", str(tmp_path / "r"),
        ])
        assert code == 1
        assert "nosuch" in capsys.readouterr().err

    def test_unknown_method_exits_1(self, tmp_path, capsys):
        code = cli_main([
            "run", "--problem", "branin", "--method", "magic",
            "--out", str(tmp_path / "r"),
        ])
        assert code == 1

    def test_unknown_flag_exits_1(self, capsys):
        assert cli_main(["run", "--granularity", "fine"]) == 1

    def test_missing_data_file_exits_2(self, tmp_path, capsys):
        code = cli_main([
            "run", "--problem", "pima-logistic", "--method", "multistart",
            "--budget", "50", "--data", str(tmp_path / "absent.csv"),
            "--out", str(tmp_path / "r"),
        ])
        assert code == 2


class TestBench:
    def test_config_file_run(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        out_dir = tmp_path / "out"
        cfg.write_text(
            "problems = branin\nmethods = multistart\ntrials = 1\n"
            f"budget = 200\noutput = {out_dir}\n"
        )
        assert cli_main(["bench", str(cfg)]) == 0
        assert (out_dir / "trace.csv").exists()
        assert (out_dir / "summary.csv").exists()
        assert (out_dir / "trajectory.csv").exists()

    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert cli_main(["bench", str(tmp_path / "none.cfg")]) == 2


class TestAccuracyCurve:
    def test_smoke(self, tmp_path, capsys):
        out_dir = str(tmp_path / "curve")
        code = cli_main([
            "accuracy-curve", "--budget", "600", "--trials", "1",
            "--seed", "0", "--out", out_dir,
        ])
        assert code == 0
        path = os.path.join(out_dir, "accuracy_curve.csv")
        rows = read_data_rows(path)
        assert rows, "expected at least one local-search row"
        last = rows[-1].split(",")
        acc = float(last[5])
        assert 0.0 <= acc <= 1.0
