import json

import pytest

from dqcount.cli import main


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_count_command_outputs_and_determinism(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    args = [
        "count", "--n", "6", "--marked", "38,8,16", "--k", "1",
        "--epsilon-node", "0.001", "--alpha-node", "0.05",
        "--reps", "3", "--seed", "7", "--trace",
    ]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    for name in ("runs.csv", "summary.json", "trace.csv"):
        assert read(out_a / name) == read(out_b / name)

    summary = json.loads(read(out_a / "summary.json"))
    assert summary["config"]["epsilon_node"] == 0.001
    assert summary["qubits_per_node"] == 7
    assert summary["per_node"][0]["successes"] == 3
    assert summary["t_prime_counts"] == {"3": 3}

    header = read(out_a / "runs.csv").decode().splitlines()[0]
    assert header.startswith("rep,node_id,seed,t_prime,count_estimate")
    rows = read(out_a / "runs.csv").decode().splitlines()[1:]
    assert len(rows) == 6  # 3 reps x 2 nodes


def test_count_command_statevector_backend(tmp_path):
    out = tmp_path / "sv"
    code = main([
        "count", "--n", "6", "--marked", "38,8,16", "--k", "1",
        "--epsilon-node", "0.005", "--alpha-node", "0.05",
        "--backend", "statevector", "--shots-per-batch", "100",
        "--reps", "1", "--seed", "11", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(read(out / "summary.json"))
    assert summary["t_prime_counts"] == {"3": 1}
    assert summary["per_node"][0]["mean_t_prime"] == 2.0


def test_count_command_oracle_file_and_parallel(tmp_path):
    oracle_file = tmp_path / "marked.txt"
    oracle_file.write_text("100110\n001000\n010000\n")
    out = tmp_path / "out"
    code = main([
        "count", "--oracle-file", str(oracle_file), "--k", "1",
        "--epsilon", "0.002", "--alpha", "0.1", "--reps", "1",
        "--seed", "3", "--parallel", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(read(out / "summary.json"))
    assert summary["config"]["n"] == 6
    assert summary["config"]["marked"] == [8, 16, 38]


def test_config_file_merges_with_flag_priority(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"n": 6, "marked": "38,8,16", "reps": 2, "seed": 5}))
    out = tmp_path / "out"
    code = main([
        "count", "--config", str(config), "--reps", "1",
        "--epsilon-node", "0.001", "--alpha-node", "0.05", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(read(out / "summary.json"))
    assert summary["config"]["reps"] == 1  # flag wins
    assert summary["config"]["seed"] == 5  # config fills the gap


def test_inner_product_and_hamming_commands(tmp_path):
    x = "1" * 64
    out = tmp_path / "ip.json"
    code = main([
        "inner-product", "--x", x, "--y", x, "--k", "1",
        "--epsilon", "0.01", "--alpha", "0.05",
        "--shots-per-batch", "100", "--seed", "1", "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(read(out))
    assert payload["exact"] == 1.0
    assert payload["abs_error"] <= payload["error_bound"]
    assert payload["ledger"]["total_qubits"] <= payload["communication_bound"]

    vec = tmp_path / "x.txt"
    vec.write_text("01" * 32)
    out2 = tmp_path / "hd.json"
    code = main([
        "hamming", "--x", str(vec), "--y", "10" * 32, "--k", "1",
        "--shots-per-batch", "100", "--seed", "2", "--out", str(out2),
    ])
    assert code == 0
    payload = json.loads(read(out2))
    assert payload["exact"] == 1.0


def test_compare_command(tmp_path):
    out = tmp_path / "cmp"
    code = main([
        "compare-miqae", "--epsilons", "0.005", "--reps", "4",
        "--seed", "0", "--out", str(out),
    ])
    assert code == 0
    lines = read(out / "sweep.csv").decode().splitlines()
    assert lines[0] == "epsilon,algorithm,successes,mean_max_big_k,mean_oracle_calls,mean_total_shots"
    assert len(lines) == 3
    assert {ln.split(",")[1] for ln in lines[1:]} == {"diqc", "miqae"}


def test_compare_command_rejects_empty_sweep(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["compare-miqae", "--epsilons", "", "--reps", "1"])
    assert exc.value.code == 2


def test_bench_command(tmp_path):
    out = tmp_path / "bench.json"
    assert main(["bench", "--n", "6", "--k", "1", "--out", str(out)]) == 0
    payload = json.loads(read(out))
    assert payload["cost_dominance_holds"] is True
    assert payload["per_node"]["qubits"] == 7
    assert payload["communication_bound_hamming"] < payload["communication_bound_inner"]


def test_prop_check_command_and_injection(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["prop-check", "--seed", "0", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.count("PASS") == 5
    payload = json.loads(read(out))
    assert all(suite["passed"] for suite in payload["suites"])

    assert main(["prop-check", "--inject-failure"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_usage_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["count", "--k", "1"])  # no marked set
    assert exc.value.code == 2
    # domain error from validation maps to exit code 2
    assert main(["count", "--n", "6", "--marked", "99",
                 "--out", str(tmp_path / "x")]) == 2
