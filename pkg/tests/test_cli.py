import json

import numpy as np
import pytest

from prodwave import cli
from prodwave.persist import read_rows


def run(args, lines=None):
    return cli.main([str(a) for a in args], log=(lines.append if lines is not None else lambda s: None))


def test_generate_writes_valid_network(tmp_path):
    out = tmp_path / "g"
    assert run(["generate", "--n", 100, "--alpha", 1.5, "--beta", 0.4, "--seed", 3, "--out", out]) == 0
    rows = read_rows(out / "network.csv")
    colsum = np.zeros(100)
    for r in rows:
        colsum[int(r["buyer"])] += float(r["weight"])
    np.testing.assert_allclose(colsum, 0.6, atol=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["seeds"]["root"] == 3
    assert set(manifest["outputs"]) >= {"network", "network_sidecar", "degree_moments"}


def test_generate_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run(["generate", "--seed", 5, "--out", tmp_path / d]) == 0
    assert (tmp_path / "a/network.csv").read_bytes() == (tmp_path / "b/network.csv").read_bytes()


def test_config_errors_exit_2(tmp_path, capsys):
    assert run(["generate", "--alpha", 0.9, "--seed", 1, "--out", tmp_path]) == 2
    assert "alpha must be > 1" in capsys.readouterr().err
    assert run(["generate", "--out", tmp_path]) == 2
    assert "seed" in capsys.readouterr().err
    assert run(["simulate", "--kind", "reduced", "--T", 10, "--out", tmp_path]) == 2
    assert run(["compare", "--seed", 1, "--set", "reps=0", "--out", tmp_path]) == 2
    assert "'reps'" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run(["generate", "--gamma-mode", "bogus"])
    assert exc.value.code == 2


def test_complex_lambda_refused_on_twomode_path(tmp_path, capsys):
    code = run(["compare", "--seed", 1, "--set", 'lambda2="0.4+0.3j"', "--T", 100, "--out", tmp_path])
    assert code == 2
    assert "mode=network" in capsys.readouterr().err


def test_compare_twomode_ratio(tmp_path):
    out = tmp_path / "c"
    assert run(["compare", "--lambda2", 0.5, "--b", 1, "--sigma", 1, "--T", 200_000, "--reps", 8,
                "--seed", 42, "--out", out]) == 0
    rows = read_rows(out / "compare.csv")
    assert len(rows) == 9 and rows[-1]["rep"] == "summary"
    assert float(rows[-1]["ratio"]) == pytest.approx(1 / 6, rel=0.02)


def test_compare_network_depth_ordering(tmp_path):
    out = tmp_path / "n"
    net = '{"n": 100, "alpha": 1.5, "beta": 0.4}'
    assert run(["compare", "--mode", "network", "--set", f"network={net}", "--L", 1, 100, "--T", 500,
                "--reps", 8, "--seed", 7, "--out", out]) == 0
    rows = read_rows(out / "compare.csv")
    reps = [r for r in rows if r["rep"] != "summary"]
    by_rep = {}
    for r in reps:
        by_rep.setdefault(r["rep"], {})[int(r["L"])] = float(r["phi_hat"])
    assert sum(v[100] >= v[1] for v in by_rep.values()) >= 7


def test_zero_shock_compare_is_all_zero(tmp_path):
    out = tmp_path / "z"
    assert run(["compare", "--sigma", 0, "--T", 200, "--reps", 2, "--seed", 1, "--out", out]) == 0
    for r in read_rows(out / "compare.csv"):
        for key in ("phi", "phi_star", "phi_hat", "phi_hat_star", "ratio"):
            assert float(r[key]) == 0.0


def test_manifest_replay_and_threads_are_bitwise(tmp_path):
    args = ["compare", "--T", 5000, "--reps", 4, "--seed", 99]
    assert run(args + ["--out", tmp_path / "a"]) == 0
    assert run(args + ["--out", tmp_path / "t", "--threads", 3]) == 0
    assert run(["--config", tmp_path / "a/manifest.json", "--out", tmp_path / "b"]) == 0
    first = (tmp_path / "a/compare.csv").read_bytes()
    assert first == (tmp_path / "b/compare.csv").read_bytes() == (tmp_path / "t/compare.csv").read_bytes()
    ma = json.loads((tmp_path / "a/manifest.json").read_text())
    mb = json.loads((tmp_path / "b/manifest.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "simulate", "seed": 4,
                               "simulate": {"kind": "reduced", "lambda2": 0.3, "T": 50}}))
    assert run(["--config", cfg, "--out", tmp_path / "o"]) == 0
    assert len(read_rows(tmp_path / "o/path.csv")) == 50
    assert run(["simulate", "--config", cfg, "--T", 20, "--out", tmp_path / "p"]) == 0
    assert len(read_rows(tmp_path / "p/path.csv")) == 20


def test_simulate_network_kinds(tmp_path):
    assert run(["generate", "--n", 40, "--alpha", 1.4, "--seed", 2, "--out", tmp_path]) == 0
    net = tmp_path / "network.csv"
    for kind in ("static", "L", "micro"):
        out = tmp_path / kind
        assert run(["simulate", "--kind", kind, "--network", net, "--T", 30, "--seed", 6, "--out", out]) == 0
        side = json.loads((out / "path.csv.json").read_text())
        assert side["network_hash"] and side["seed"] == 6


def test_spectrum_and_calibrate_and_report(tmp_path):
    lines = []
    assert run(["spectrum", "--lambda2", 0.5, "--window-T", 20, "--out", tmp_path], lines) == 0
    assert len(read_rows(tmp_path / "window_spectrum.csv")) == 19
    assert run(["calibrate", "--grid", 0.2, 0.5, "--shares", 0.3333333333333333, "--out", tmp_path], lines) == 0
    rows = read_rows(tmp_path / "calibration.csv")
    assert rows[0]["description"] == "≈ one-sixth"
    assert run(["compare", "--T", 1000, "--reps", 3, "--seed", 1, "--out", tmp_path]) == 0
    assert run(["report", "--out", tmp_path], lines) == 0
    assert read_rows(tmp_path / "report.csv")[0]["reps"] == "3"


def test_verify_ledger_and_tamper_hook(tmp_path):
    assert run(["verify", "fast", "--only", 4, 12, "--out", tmp_path]) == 0
    ledger = read_rows(tmp_path / "verify_ledger.csv")
    assert {"id", "target", "observed", "tolerance", "passed"} <= set(ledger[0])
    assert run(["verify", "fast", "--only", 4, "--tamper-lambda2", 0.001, "--out", tmp_path]) == 3
    failed = {r["id"] for r in read_rows(tmp_path / "verify_ledger.csv") if r["passed"] == "False"}
    assert "4c" in failed
