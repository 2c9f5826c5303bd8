import json
import math
import os
import subprocess

import pytest

TOOL = os.environ.get("SNVTOOL", "snvtool")


def run(args, cwd, check=True):
    env = dict(os.environ, SOURCE_DATE_EPOCH="1700000000")
    env.pop("SNV_CONFIG_DIR", None)
    p = subprocess.run([TOOL] + args, cwd=cwd, capture_output=True, text=True, env=env)
    if check and p.returncode != 0:
        raise AssertionError(f"exit {p.returncode}: {p.stderr}")
    return p


def run_json(args, cwd):
    return json.loads(run(args + ["--json"], cwd).stdout)


def par(fit, name):
    return fit["params"][name]["value"]


def test_help_and_version(tmp_path):
    assert run(["--help"], tmp_path).returncode == 0
    out = run(["--version"], tmp_path).stdout
    assert out.strip()


def test_usage_errors_exit_2(tmp_path):
    assert run(["no-such-command"], tmp_path, check=False).returncode == 2
    # bare numbers need a unit
    p = run(["sim-stream", "--duration", "1"], tmp_path, check=False)
    assert p.returncode == 2
    assert "unit" in p.stderr
    p = run(["depth", "--reference", "1e4cps"], tmp_path, check=False)
    assert p.returncode == 2


def test_bad_input_exit_1(tmp_path):
    (tmp_path / "bad.csv").write_text("wavelength_nm,counts\n600,1\n601,oops\n")
    p = run(["psb", "bad.csv", "--zpl", "619.7nm"], tmp_path, check=False)
    assert p.returncode == 1
    assert "bad.csv:3:" in p.stderr
    p = run(["g2", "missing.bin"], tmp_path, check=False)
    assert p.returncode in (1, 2)


def test_stream_g2_pipeline_and_manifest(tmp_path):
    sim = run_json(["sim-stream", "--duration", "0.5s", "--max-rate", "2Mcps", "--power", "200uW",
                    "--seed", "11", "-o", "s"], tmp_path)
    assert sim["records"] > 100000
    man = json.loads((tmp_path / "s.manifest.json").read_text())
    assert man["command"] == "sim-stream"
    assert man["seed"] == 11
    assert man["timestamp"].startswith("2023-11-14")
    assert len(man["config_digest"]) == 64
    assert any(o["path"].endswith("s.bin") for o in man["outputs"])

    g = run_json(["g2", "s.bin", "--bin", "1ns", "--window", "60ns", "-o", "g"], tmp_path)
    assert g["fit"]["converged"]
    tau = par(g["fit"], "tau_anti_ns")
    assert abs(tau - sim["antibunching_time_ns"]) < 0.15 * sim["antibunching_time_ns"]
    gm = json.loads((tmp_path / "g.manifest.json").read_text())
    assert gm["inputs"][0]["sha256"] == man["outputs"][0]["sha256"]
    assert (tmp_path / "g.csv").exists()


def test_reproducible_outputs(tmp_path):
    a = run_json(["sim-stream", "--duration", "0.05s", "--seed", "5", "-o", "a"], tmp_path)
    b = run_json(["sim-stream", "--duration", "0.05s", "--seed", "5", "-o", "b"], tmp_path)
    assert a["records"] == b["records"]
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_table_mode_matches_json(tmp_path):
    j = run_json(["depth", "--reference", "10kcps", "--rate", "5kcps"], tmp_path)
    table = run(["depth", "--reference", "10kcps", "--rate", "5kcps"], tmp_path).stdout
    assert json.dumps(j["wing_depth_nm"]) in table
    assert j["sigma_is_placeholder"] is True
    assert abs(j["estimates"][0]["depth_nm"] - 30.0 * math.sqrt(-2 * math.log(0.01))) < 1e-3


def test_tcspc_lifetime(tmp_path):
    run(["sim-tcspc", "--lifetime", "7.61ns", "--pulses", "300000", "--dark", "0cps", "--seed", "2",
         "-o", "h"], tmp_path)
    r = run_json(["lifetime", "h.csv"], tmp_path)
    tau = par(r, "tau_ns")
    assert abs(tau - 7.61) < 0.3


def test_saturation_fit(tmp_path):
    rows = ["power_uw,rate_cps"] + [f"{p},{120e3 * p / (p + 200.0)}" for p in (10, 30, 100, 200, 400, 1000, 2000)]
    (tmp_path / "sat.csv").write_text("\n".join(rows) + "\n")
    r = run_json(["saturation", "sat.csv"], tmp_path)
    psat = par(r, "p_sat_uw")
    assert psat == pytest.approx(200.0, rel=1e-6)


def test_thermometer_round_trip(tmp_path):
    rows = ["T_K,linewidth_GHz,lw_err,shift_GHz,shift_err,dw,dw_err"]
    for t in range(4, 41, 3):
        rows.append(f"{t},{0.03 + 2e-5 * t ** 3},0.001,,,,")
    (tmp_path / "t.csv").write_text("\n".join(rows) + "\n")
    run(["temp-fit", "t.csv", "--model", "T3", "-o", "law"], tmp_path)
    reading = run_json(["thermo", "--law", "law.json", "--linewidth", f"{0.03 + 2e-5 * 25 ** 3}GHz"], tmp_path)
    assert reading["temperature_k"] == pytest.approx(25.0, abs=1e-6)
    assert reading["ci_low_k"] < 25.0 < reading["ci_high_k"]
