import json

import pytest
from click.testing import CliRunner

from gearsynth.cli import main

PAPER_LINE = ("<start> MRGF2-500 mesh_2n MSGA2-40 tra- SH-200 "
              "SBSG2-3020R mesh_1p SBSG2-2030L <end>")
SHAFT_LINE = "<start> tra+ SH-100 <end>"


@pytest.fixture()
def runner():
    return CliRunner()


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_validate_ok_and_exit_codes(runner, tmp_path):
    path = _write(tmp_path, "seqs.txt", f"{PAPER_LINE}\n{SHAFT_LINE}\n")
    result = runner.invoke(main, ["validate", path])
    assert result.exit_code == 0
    assert result.output.count("ok") == 2

    bad = _write(tmp_path, "bad.txt", f"{SHAFT_LINE}\n<start> MRGF2-500 <end>\n")
    result = runner.invoke(main, ["validate", bad])
    assert result.exit_code == 1
    assert "line 2" in result.output

    result = runner.invoke(main, ["validate", str(tmp_path / "missing.txt")])
    assert result.exit_code == 2


def test_validate_empty_file(runner, tmp_path):
    path = _write(tmp_path, "empty.txt", "")
    result = runner.invoke(main, ["validate", path])
    assert result.exit_code == 0
    assert result.output == ""


def test_validate_malformed_token(runner, tmp_path):
    path = _write(tmp_path, "seqs.txt", "<start> WAT-1 <end>\n")
    result = runner.invoke(main, ["validate", path])
    assert result.exit_code == 1
    assert "position 1" in result.output


def test_simulate_table_and_record(runner, tmp_path):
    path = _write(tmp_path, "seqs.txt", f"{SHAFT_LINE}\n")
    result = runner.invoke(main, ["simulate", path])
    assert result.exit_code == 0
    assert "rotation" in result.output

    result = runner.invoke(main, ["simulate", path, "--format", "record"])
    assert result.exit_code == 0
    record = json.loads(result.output.splitlines()[0])
    assert record["s"] == 1.0
    assert record["p"] == [0.1, 0.0, 0.0]
    assert record["feasible"] is True

    rerun = runner.invoke(main, ["simulate", path, "--format", "record"])
    assert rerun.output == result.output

    bad = _write(tmp_path, "bad.txt", "<start> MRGF2-500 <end>\n")
    result = runner.invoke(main, ["simulate", bad])
    assert result.exit_code == 1
    assert "line 1" in result.output


def test_random_deterministic(runner):
    a = runner.invoke(main, ["random", "--n", "3", "--seed", "5"])
    b = runner.invoke(main, ["random", "--n", "3", "--seed", "5"])
    assert a.exit_code == 0 and a.output == b.output


def test_enumerate_count(runner):
    result = runner.invoke(main, ["enumerate", "--max-components", "3"])
    assert result.exit_code == 0
    assert "count: 10" in result.output


def test_dataset_generate_split_eval_round_trip(runner, tmp_path):
    out = str(tmp_path / "ds")
    result = runner.invoke(main, ["gen-dataset", "--n", "100", "--seed", "4",
                                  "--out", out])
    assert result.exit_code == 0
    manifest = json.loads(result.output)
    assert manifest["accepted"] == 100

    result = runner.invoke(main, ["split", "--records", f"{out}/records.txt",
                                  "--out", str(tmp_path / "sp"),
                                  "--val-frac", "0.1", "--test-frac", "0.1"])
    assert result.exit_code == 0
    counts = json.loads(result.output)
    assert counts == {"train": 80, "val": 10, "test": 10, "seed": 0,
                      "val_frac": 0.1, "test_frac": 0.1}

    result = runner.invoke(main, ["eval", f"{out}/records.txt"])
    assert result.exit_code == 0
    assert "100.00" in result.output

    as_json = runner.invoke(main, ["eval", f"{out}/records.txt", "--json"])
    report = json.loads(as_json.output)
    assert report["valid_pct"] == 100.0
    assert report["pos_m"] == 0.0


def test_search_command(runner):
    result = runner.invoke(main, ["search", "--method", "mcts",
                                  "--req", "0", "0", "1.0", "0.1", "0", "0", "0", "1",
                                  "--budget", "50", "--seed", "2"])
    assert result.exit_code == 0
    assert "candidates evaluated: 50" in result.output
    assert "best sequence: <start>" in result.output

    missing = runner.invoke(main, ["search", "--method", "eda+c",
                                   "--req", "0", "0", "1.0", "0.1", "0", "0", "0", "1",
                                   "--budget", "100"])
    assert missing.exit_code == 1
    assert "CompleterUnreachable" in missing.output


def test_search_req_file(runner, tmp_path):
    path = _write(tmp_path, "req.txt",
                  "0.0 0.0 1.0 0.1 0.0 0.0 0.0 1.0 | " + SHAFT_LINE + "\n")
    result = runner.invoke(main, ["search", "--method", "random", "--req-file",
                                  path, "--budget", "50", "--seed", "0"])
    assert result.exit_code == 0
    assert "best sequence" in result.output


def test_benchmark_command(runner):
    result = runner.invoke(main, [
        "benchmark", "--methods", "random,eda+c", "--n-problems", "2",
        "--seed", "0", "--budgets", "random=100,eda+c=100",
        "--completer", "random"])
    assert result.exit_code == 0
    assert "random:" in result.output and "eda+c:" in result.output
    assert "Model" in result.output
