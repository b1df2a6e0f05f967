import csv
import io
import json
import shutil
import subprocess

import pytest

from ftqc_reaction import config as cfg
from ftqc_reaction.cli import main, sweep_values
from ftqc_reaction.errors import ConfigError


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------- config

def test_defaults_without_file(monkeypatch):
    monkeypatch.delenv(cfg.ENV_VAR, raising=False)
    rc = cfg.load(None)
    assert rc.decoder.name == "cc-asic" and rc.circuit.name == "fermi_hubbard"


@pytest.mark.parametrize("bad", [
    {"hardware": {"stab_round_us": "fast"}},
    {"nonsense": 1},
    {"decoder": {"alpha": 1e-9}},
    {"simulate": {"n_decoders": 0}},
    {"comms": {"t_qc": -1}},
])
def test_schema_rejects(bad):
    with pytest.raises(ConfigError):
        cfg.from_dict(bad)


def test_presets_and_overrides():
    rc = cfg.from_dict({"decoder": {"name": "mine", "alpha": 1e-10, "beta": 1.1},
                        "comms": {"scale_to_us": 20.0},
                        "circuit": {"preset": "conotoxin", "error_budget": 0.01},
                        "assembly": {"objective": "space_optimal"}})
    assert rc.decoder.alpha == 1e-10
    assert sum(vars(rc.comms).values()) == pytest.approx(20.0)
    assert rc.circuit.q_logical == 241 and rc.circuit.error_budget == 0.01
    assert rc.objective == "space_optimal"


def test_unknown_preset_is_config_error():
    with pytest.raises(ConfigError):
        cfg.from_dict({"decoder": "quantum-magic"})


def test_env_var_is_used(tmp_path, monkeypatch):
    monkeypatch.setenv(cfg.ENV_VAR, write(tmp_path, "decoder: pymatching\n"))
    assert cfg.load(None).decoder.name == "pymatching"


# ---------------------------------------------------------------- cli

def test_exit_code_config_error(capsys, tmp_path):
    code, _, err = run_cli(capsys, "estimate", "--config", write(tmp_path, "hardware: 3\n"))
    assert code == 2 and "config" in err
    assert run_cli(capsys, "estimate", "--decoder", "nope")[0] == 2
    assert run_cli(capsys, "nonexistent-command")[0] == 2
    assert run_cli(capsys, "sweep-reaction", "--points", "0")[0] == 2
    assert run_cli(capsys, "estimate", "--jobs", "0")[0] == 2


def test_exit_code_infeasible(capsys):
    code, _, err = run_cli(capsys, "estimate", "--error-budget", "1e-40", "--gamma-us", "100")
    assert code == 3 and "infeasible" in err


def test_estimate_json(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--circuit", "conotoxin", "--gamma-us", "250")
    assert code == 0
    obj = json.loads(out)
    assert obj["circuit"] == "conotoxin" and obj["d_core"] % 2 == 1


def test_estimate_equals_one_point_sweep(capsys):
    _, est, _ = run_cli(capsys, "estimate", "--format", "csv", "--gamma-us", "333")
    _, swp, _ = run_cli(capsys, "sweep-reaction", "--format", "csv", "--unit", "us",
                        "--gamma-min", "333", "--gamma-max", "333", "--points", "1")
    assert est == swp


def test_sweep_csv_parses_and_jobs_keep_order(capsys):
    args = ("sweep-reaction", "--format", "csv", "--circuit", "conotoxin", "--points", "9")
    _, serial, _ = run_cli(capsys, *args)
    _, par, _ = run_cli(capsys, *args, "--jobs", "3")
    assert serial == par
    rows = list(csv.DictReader(io.StringIO(serial)))
    assert rows[0].keys() >= {"gamma_mem_us", "d_core", "storage_patches"}
    g = [float(r["gamma_in_cycles"]) for r in rows if r["level_index"] == "0"]
    assert g == sorted(g) and len(g) == 9


def test_sweep_values():
    assert sweep_values(1, 1000, 4) == pytest.approx([1, 10, 100, 1000])
    with pytest.raises(ValueError):
        sweep_values(5, 1, 3)


def test_decoder_speed_crossings(capsys):
    code, out, _ = run_cli(capsys, "decoder-speed", "--comms", "o10us", "--points", "5")
    assert code == 0
    obj = json.loads(out)
    assert obj["t_com_us"] == pytest.approx(10.0)
    assert {r["status"] for r in obj["rows"]} <= {"ok", "comm_bound", "infeasible"}
    asic = {c["t_circuit_s"]: c["t_count_crossing"] for c in obj["crossings"] if c["decoder"] == "cc-asic"}
    assert set(asic) == {3600.0, 30 * 86400.0}


def test_decoder_speed_d_sweep_csv(capsys):
    code, out, _ = run_cli(capsys, "decoder-speed", "--format", "csv", "--sweep", "d", "--values", "11", "31")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["d"] for r in rows] == ["11", "31", "11", "31"]
    assert run_cli(capsys, "decoder-speed", "--sweep", "d", "--values", "12")[0] == 2


def test_decoders_reference(capsys):
    code, out, _ = run_cli(capsys, "decoders")
    obj = json.loads(out)
    assert code == 0 and obj["k_total"] == 9562 and obj["reference_k_total"] == 15000
    code, out, _ = run_cli(capsys, "decoders", "--q-logical", "1000", "--format", "csv")
    assert code == 0 and list(csv.DictReader(io.StringIO(out)))[0]["q_logical"] == "1000"


def test_simulate_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run_cli(capsys, "simulate", "--d", "11", "--n-injections", "20", "--trace", str(trace))
    obj = json.loads(out)
    assert code == 0
    assert obj["measured_gamma_mem_us"] == pytest.approx(obj["analytic_gamma_mem_us"], rel=0.01)
    assert all(json.loads(line)["event_type"] for line in trace.read_text().splitlines())
    code, out, _ = run_cli(capsys, "simulate", "--d", "11", "--n-injections", "5", "--msf-unit")
    assert code == 0 and json.loads(out)["mean_injection_period_us"] == pytest.approx(121)
    assert run_cli(capsys, "simulate", "--d", "10")[0] == 2


def test_windows_export(capsys):
    code, out, _ = run_cli(capsys, "windows", "--kind", "surgery", "--nx", "2", "--nz", "2")
    assert code == 0
    recs = [json.loads(x) for x in out.splitlines()]
    assert len(recs) == 4 and {r["layer"] for r in recs} == {"1", "2", "3"}
    code, out, _ = run_cli(capsys, "windows", "--format", "csv", "--cycles", "3")
    assert code == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 5


@pytest.mark.skipif(shutil.which("ftqc-reaction") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["ftqc-reaction", "decoders", "--format", "csv"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("decoder,")
