import json
import subprocess
import sys

import pytest

from fedthal.cli import main

SMALL = ["--rows", "400", "--carriers", "160"]


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_stage_chain(tmp_path, capsys):
    raw, binned, splits = tmp_path / "raw.csv", tmp_path / "binned.csv", tmp_path / "split"
    assert main(["gen", *SMALL, "--seed", "3", "-o", str(raw)]) == 0
    assert main(["preprocess", "-i", str(raw), "-o", str(binned), "--missing", "neighbor-average"]) == 0
    assert main(["split", "-i", str(binned), "--out", str(splits)]) == 0
    assert sorted(p.name for p in splits.iterdir()) == [
        "client_0.csv", "client_1.csv", "client_2.csv", "train.csv", "val.csv"]
    model = tmp_path / "svm.json"
    assert main(["train-local", "-i", str(splits / "client_0.csv"), "--kind", "svm", "-o", str(model)]) == 0
    assert json.loads(model.read_text())["type"] == "svm"
    ev = tmp_path / "ev"
    assert main(["eval", "-m", str(model), "-i", str(splits / "val.csv"), "--out", str(ev)]) == 0
    assert (ev / "eval_validation.json").exists() and (ev / "report.txt").exists()
    assert main(["report", str(ev / "eval_validation.json"), "--format", "csv"]) == 0
    assert "accuracy_pct" in capsys.readouterr().out


def test_run_outputs_and_eval_of_global(tmp_path):
    out = tmp_path / "run"
    assert main(["run", *SMALL, "--out", str(out)]) == 0
    files = set(_tree(out))
    assert {"config.txt", "global_model.json", "curves.csv", "eval_train.json",
            "eval_validation.json", "report.txt"} <= files
    assert {"local_models/client-0_dt.json", "local_models/client-1_nb.json",
            "local_models/client-2_svm.json"} <= files
    report = (out / "report.txt").read_text()
    assert "Global Model (validation)" in report and "Miss rate = 100 - accuracy" in report
    binned = tmp_path / "b.csv"
    main(["gen", *SMALL, "-o", str(tmp_path / "raw.csv")])
    main(["preprocess", "-i", str(tmp_path / "raw.csv"), "-o", str(binned)])
    assert main(["eval", "-m", str(out / "global_model.json"), "-i", str(binned),
                 "--out", str(tmp_path / "ev")]) == 0


def test_run_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["run", *SMALL, "--mode", "fedavg", "--kinds", "svm", "--rounds", "3",
                     "--out", str(tmp_path / name)]) == 0
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("rows = 300\ncarriers = 120\nformat = csv\nseed = 5\n")
    assert main(["run", "--config", str(cfg), "--seed", "6", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "report.csv").exists()
    assert "seed = 6" in (tmp_path / "o" / "config.txt").read_text()


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run", "--mode", "gossip"],
                                  ["gen"], ["run", "--rows", "many"]])
def test_usage_errors_exit_1(argv):
    assert main(argv) == 1


def test_pipeline_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 2
    assert "pipeline error [ingest]" in capsys.readouterr().err
    assert main(["run", "--clients", "0", "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("age,gender\n1,m\n")
    assert main(["preprocess", "-i", str(bad), "-o", str(tmp_path / "x.csv")]) == 2
    assert "[preprocess]" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fedthal", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "protocol v1" in out.stdout
