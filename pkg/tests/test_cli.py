import numpy as np
import pytest

from rad3t.cli import main
from rad3t.configfile import parse_config, parse_config_text, serialize_config, write_config
from rad3t.errors import ConfigurationError
from rad3t import scenarios


def run_cli(*args):
    return main(list(args))


def read_lines(path):
    return path.read_text().splitlines()


def test_run_emits_snapshot_and_series(tmp_path):
    rc = run_cli("run", "--builtin", "ap_test", "--n", "16", "--t-end", "0.01",
                 "--out-dir", str(tmp_path))
    assert rc == 0
    snap = tmp_path / "ap_test_t0.01.csv"
    series = tmp_path / "ap_test_series.csv"
    assert snap.exists() and series.exists()
    header = read_lines(snap)[0].split(",")
    assert header[:4] == ["x", "T_r", "T_e", "T_i"]
    assert header[4:] == [f"psi_{l}" for l in range(8)]
    s_header = read_lines(series)[0].split(",")
    assert s_header == ["t", "dt", "micro_iters", "macro_iters", "E_total"]


def test_run_deterministic_bytes(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    for d in (a_dir, b_dir):
        rc = run_cli("run", "--builtin", "ap_test", "--n", "16",
                     "--t-end", "0.01", "--out-dir", str(d))
        assert rc == 0
    fa = (a_dir / "ap_test_t0.01.csv").read_bytes()
    fb = (b_dir / "ap_test_t0.01.csv").read_bytes()
    assert fa == fb


def test_run_homogeneous_series_rows(tmp_path):
    rc = run_cli("run", "--builtin", "homog_1", "--t-end", "0.05",
                 "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "homog_1_series.csv")
    assert len(rows) == 1 + 20  # header + 0.05 / 0.0025 steps


def test_csv_round_trip_precision(tmp_path):
    rc = run_cli("run", "--builtin", "ap_test", "--n", "16", "--t-end", "0.005",
                 "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "ap_test_t0.005.csv")[1:]
    for tok in rows[3].split(","):
        val = float(tok)
        assert f"{val:.17g}" == tok


def test_unknown_builtin_exits_2(capsys):
    assert run_cli("run", "--builtin", "nope") == 2
    assert "unknown builtin" in capsys.readouterr().err


def test_missing_scenario_exits_2():
    assert run_cli("run", "--t-end", "1.0") == 2


def test_invalid_config_file_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[grid]\nx_min = 0\nx_max = 1\nn = 16\nbogus_key = 3\n")
    assert run_cli("run", "--config", str(bad)) == 2
    err = capsys.readouterr().err
    assert "bogus_key" in err


def test_config_file_round_trip(tmp_path):
    cfg = scenarios.builtin("marshak_cond")
    path = tmp_path / "marshak.cfg"
    write_config(cfg, path)
    back = parse_config(path)
    assert back == cfg


def test_config_unknown_section_rejected():
    text = serialize_config(scenarios.builtin("ap_test"))
    with pytest.raises(ConfigurationError):
        parse_config_text(text + "\n[mystery]\nkey = 1\n")


def test_out_dir_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("RAD3T_OUT_DIR", str(tmp_path))
    rc = run_cli("run", "--builtin", "ap_test", "--n", "16", "--t-end", "0.005")
    assert rc == 0
    assert (tmp_path / "ap_test_series.csv").exists()


def test_compare_same_solver_zero_difference(tmp_path):
    rc = run_cli("compare", "--builtin", "ap_test", "--n", "16",
                 "--t-end", "0.005", "--solvers", "pn,pn",
                 "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "ap_test_compare_pn_vs_pn.csv")
    values = [float(tok) for tok in rows[1].split(",")[1:]]
    assert all(v == 0.0 for v in values)


def test_compare_pn_vs_diffusion(tmp_path):
    rc = run_cli("compare", "--builtin", "ap_test", "--n", "32",
                 "--epsilon", "0.001", "--t-end", "0.01",
                 "--solvers", "pn,diffusion_ref", "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "ap_test_compare_pn_vs_diffusion_ref.csv")
    values = [float(tok) for tok in rows[1].split(",")[1:]]
    assert all(v < 5e-3 for v in values)


def test_convergence_tiny_sweep(tmp_path):
    rc = run_cli("convergence", "--builtin", "ap_test", "--t-end", "0.01",
                 "--resolutions", "8,16", "--reference-n", "32",
                 "--epsilons", "1.0", "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "ap_test_convergence.csv")
    assert rows[0].startswith("sweep,n,l2_T_r,order_T_r")
    assert len(rows) == 3
    first = rows[1].split(",")
    assert first[0] == "epsilon=1" and first[3] == ""
    second = rows[2].split(",")
    assert float(second[2]) > 0.0
    assert second[3] != ""


def test_convergence_rejects_bad_resolution(tmp_path, capsys):
    rc = run_cli("convergence", "--builtin", "ap_test",
                 "--resolutions", "12", "--reference-n", "32",
                 "--out-dir", str(tmp_path))
    assert rc == 2


def test_energy_audit(tmp_path):
    rc = run_cli("energy-audit", "--builtin", "ap_test", "--n", "16",
                 "--t-end", "0.02", "--out-dir", str(tmp_path))
    assert rc == 0
    rows = read_lines(tmp_path / "ap_test_energy.csv")
    drifts = [float(r.split(",")[2]) for r in rows[1:]]
    assert max(drifts) <= 1e-10


def test_snapshots_override(tmp_path):
    rc = run_cli("run", "--builtin", "ap_test", "--n", "16", "--t-end", "0.01",
                 "--snapshots", "0.005,0.01", "--out-dir", str(tmp_path))
    assert rc == 0
    assert (tmp_path / "ap_test_t0.005.csv").exists()
    assert (tmp_path / "ap_test_t0.01.csv").exists()
