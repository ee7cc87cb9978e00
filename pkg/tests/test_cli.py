import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from iafc_memory.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, LOCK, MANIFEST, main
from iafc_memory.config import (
    ConfigError,
    config_hash,
    dump_config,
    load_config,
    parse_config,
    parse_quantity,
)
from iafc_memory.estimator import CavityMemory
from iafc_memory.memory import analyze_echo
from iafc_memory.pulse import Pulse, SimGrid, Waveform, read_waveform_binary

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

IDEAL = {
    "mode": "echo",
    "comb": {"ideal": {"n_teeth": 7, "spacing": "300 MHz", "linewidth": "7.5 /us",
                       "coupling": "1.5 /ns"}},
    "cavity": {"kappa": "7 /ns"},
}


def write(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def read_table(path):
    lines = Path(path).read_text().splitlines()
    header = [line for line in lines if line.startswith("#")]
    data = np.loadtxt(path, comments="#", delimiter="\t", ndmin=2)
    return header, data


# ---------------------------------------------------------------- parsing

@pytest.mark.parametrize("text,kind,value", [
    ("300 MHz", "frequency", 2 * np.pi * 3e8),
    ("1 GHz", "frequency", 2 * np.pi * 1e9),
    ("7 /ns", "frequency", 7e9),
    ("7.5 /us", "frequency", 7.5e6),
    ("2.5e9 rad/s", "frequency", 2.5e9),
    ("3 Grad/s", "frequency", 3e9),
    ("4 ns^-1", "frequency", 4e9),
    ("2 ns", "time", 2e-9),
    ("0.15 T", "field", 0.15),
    ("1500 G", "field", 0.15),
    ("420.3 nm", "length", 420.3e-9),
    ("20 um3", "volume", 20e-18),
])
def test_units(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-15)


def test_spacing_unit_rule_is_exact():
    assert parse_quantity("300 MHz", "frequency") == 2 * np.pi * 3e8


@pytest.mark.parametrize("text,kind,match", [
    (300, "frequency", "no unit"),
    ("300 T", "frequency", "not a frequency unit"),
    ("fast GHz", "frequency", "cannot parse"),
    ("2 GHz", "time", "not a time unit"),
])
def test_unit_errors(text, kind, match):
    with pytest.raises(ConfigError, match=match):
        parse_quantity(text, kind, "cavity.kappa")


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_round_trip_bit_exact(path, tmp_path):
    cfg = load_config(path)
    out = tmp_path / "again.yaml"
    dump_config(cfg, out)
    again = load_config(out)
    assert again == cfg
    assert config_hash(again) == config_hash(cfg)
    assert dump_config(again) == dump_config(cfg)


def test_round_trip_preserves_awkward_floats(tmp_path):
    data = dict(IDEAL, comb={"ideal": {"n_teeth": 7, "spacing": "0.1 GHz",
                                       "linewidth": "3.3333333333333333 /us", "coupling": "1.7 /ns"}})
    cfg = parse_config(data)
    again = load_config(write(tmp_path, yaml.safe_load(dump_config(cfg))))
    assert again.comb == cfg.comb
    assert again.comb["spacing"] == 2 * np.pi * 0.1 * 1e9


def test_both_comb_sources_rejected():
    data = dict(IDEAL)
    data["comb"] = dict(IDEAL["comb"], atomic={"atom": "Rb87", "field": "0.15 T"})
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "comb.ideal" in str(err.value) and "comb.atomic" in str(err.value)


@pytest.mark.parametrize("mutate,key", [
    (lambda d: d["cavity"].update(colour="red"), "cavity.colour"),
    (lambda d: d.update(extra=1), "extra"),
    (lambda d: d["cavity"].pop("kappa"), "cavity.kappa"),
    (lambda d: d["comb"]["ideal"].update(spacing=300), "comb.ideal.spacing"),
    (lambda d: d["comb"]["ideal"].update(n_teeth="7"), "comb.ideal.n_teeth"),
    (lambda d: d.update(mode="dance"), "mode"),
    (lambda d: d.update(comb={}), "comb"),
    (lambda d: d["cavity"].update(mode_volume="20 um3"), "cavity.mode_volume"),
])
def test_config_errors_name_the_key(mutate, key):
    data = json.loads(json.dumps(IDEAL))
    mutate(data)
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert str(err.value).startswith(key)


def test_atomic_config_checks():
    data = {"mode": "comb", "comb": {"atomic": {"atom": "Rb87", "field": "0.15 T"}},
            "cavity": {"kappa": "7 /ns"}}
    with pytest.raises(ConfigError, match="cavity.mode_volume"):
        parse_config(data)
    data["cavity"]["mode_volume"] = "20 um3"
    data["comb"]["atomic"]["atom"] = "Xx1"
    with pytest.raises(ConfigError, match="comb.atomic.atom"):
        parse_config(data)


def test_mode_conflict_and_sweep_block():
    with pytest.raises(ConfigError, match="mode"):
        parse_config(IDEAL, mode="comb")
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(dict(IDEAL, mode="sweep"))
    bad = dict(IDEAL, mode="sweep", sweep={"parameter": "colour", "values": [1]})
    with pytest.raises(ConfigError, match="sweep.parameter"):
        parse_config(bad)
    cfg = parse_config(dict(IDEAL, mode="sweep",
                            sweep={"parameter": "kappa", "values": ["4 /ns", "7 /ns"]}))
    assert cfg.sweep["values"] == (4e9, 7e9)


# -------------------------------------------------------------------- runs

def test_echo_run_reproduces_report_and_library(tmp_path):
    out = tmp_path / "run"
    assert main(["echo", "--config", str(CONFIGS / "comb300_echo.yaml"), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / MANIFEST).read_text())
    assert manifest["status"] == "complete"
    report = json.loads((out / "echo_report.json").read_text())
    assert report["config_sha256"] == manifest["config_sha256"]

    header, data = read_table(out / "waveforms.tsv")
    assert f"# config_sha256: {manifest['config_sha256']}" in header
    dt = float(next(h for h in header if h.startswith("# dt_s:")).split(":")[1])
    grid = SimGrid(data.shape[0], data.shape[0] * dt)
    w_in = Waveform(grid, data[:, 1] + 1j * data[:, 2])
    w_out = Waveform(grid, data[:, 3] + 1j * data[:, 4])
    r = report["report"]
    again = analyze_echo(w_in, w_out, r["spacing"], Pulse(r["pulse_width"], r["pulse_center"]))
    assert again.efficiency == pytest.approx(r["efficiency"], abs=1e-12)
    assert again.echo_time == pytest.approx(r["echo_time"], abs=1e-15)
    assert 3.0e-9 <= r["echo_time"] <= 3.7e-9

    binary = read_waveform_binary(out / "output.bin")
    assert np.array_equal(binary.samples, w_out.samples)

    cfg = load_config(CONFIGS / "comb300_echo.yaml")
    direct = CavityMemory(**cfg.estimator_params()).fit()
    assert r["efficiency"] == direct.efficiency_


def test_rerun_is_byte_identical(tmp_path):
    args = ["sweep", "--config", str(CONFIGS / "finesse_sweep.yaml")]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == EXIT_OK
    a = (tmp_path / "a" / "sweep.tsv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.tsv").read_bytes()
    ma = json.loads((tmp_path / "a" / MANIFEST).read_text())
    mb = json.loads((tmp_path / "b" / MANIFEST).read_text())
    for m in (ma, mb):
        m.pop("timestamp")
        m.pop("workers")
    assert ma == mb


def test_comb_mode_rb(tmp_path):
    out = tmp_path / "comb"
    assert main(["comb", "--config", str(CONFIGS / "rb_comb.yaml"), "--out", str(out)]) == EXIT_OK
    header, table = read_table(out / "comb.tsv")
    _, first = np.unique(table[:, 3], return_index=True)
    assert table[first, 2].sum() == pytest.approx(1.0, abs=1e-12)
    assert any("sum_sigma_over_ground_levels: 1.0" in h for h in header)


def test_absorption_mode(tmp_path):
    out = tmp_path / "abs"
    assert main(["absorption", "--config", str(CONFIGS / "rb_absorption.yaml"),
                 "--out", str(out)]) == EXIT_OK
    _, table = read_table(out / "absorption.tsv")
    assert table.shape == (8001, 2)
    assert table[:, 1].max() == pytest.approx(1.0)


def test_optimize_mode(tmp_path):
    data = dict(IDEAL, mode="optimize",
                optimize={"coupling": {"start": "1 /ns", "stop": "2 /ns", "points": 2},
                          "kappa": {"start": "7 /ns", "stop": "7 /ns", "points": 1},
                          "refine": False})
    out = tmp_path / "opt"
    assert main(["optimize", "--config", str(write(tmp_path, data)), "--out", str(out)]) == EXIT_OK
    optimum = json.loads((out / "optimum.json").read_text())["optimum"]
    assert optimum["kappa"] == 7e9


def test_manifest_reruns_itself(tmp_path):
    out = tmp_path / "first"
    assert main(["comb", "--config", str(CONFIGS / "rb_comb.yaml"), "--out", str(out)]) == EXIT_OK
    cfg = load_config(out / MANIFEST)
    assert cfg == load_config(CONFIGS / "rb_comb.yaml")
    assert main(["comb", "--config", str(out / MANIFEST), "--out", str(tmp_path / "second")]) == EXIT_OK
    assert (out / "comb.tsv").read_bytes() == (tmp_path / "second" / "comb.tsv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert main(["echo", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    bad = write(tmp_path, dict(IDEAL, cavity={"kappa": "7 T"}), "bad.yaml")
    assert main(["echo", "--config", str(bad), "--out", str(tmp_path / "x")]) == EXIT_CONFIG
    assert "cavity.kappa" in capsys.readouterr().err
    out = tmp_path / "grid"
    code = main(["echo", "--config", str(CONFIGS / "comb300_echo.yaml"), "--out", str(out),
                 "--samples-cap", "64"])
    assert code == EXIT_NUMERICAL
    assert "numerical error" in capsys.readouterr().err
    manifest = json.loads((out / MANIFEST).read_text())
    assert manifest["status"] == "failed" and manifest["outputs"] == []
    assert sorted(p.name for p in out.iterdir()) == [MANIFEST]


def test_lock_blocks_concurrent_use(tmp_path):
    out = tmp_path / "busy"
    out.mkdir()
    (out / LOCK).write_text("123")
    assert main(["comb", "--config", str(CONFIGS / "rb_comb.yaml"), "--out", str(out)]) == EXIT_CONFIG
    assert not (out / "comb.tsv").exists()


def test_env_var_selects_atom_data(tmp_path, monkeypatch):
    from importlib import resources

    text = resources.files("iafc_memory").joinpath("data/atoms.yaml").read_text()
    custom = tmp_path / "atoms.yaml"
    custom.write_text(text.replace('gamma_MHz: "1.421"', 'gamma_MHz: "3.0"'))
    monkeypatch.setenv("IAFC_ATOM_DATA", str(custom))
    out = tmp_path / "env"
    assert main(["comb", "--config", str(CONFIGS / "rb_comb.yaml"), "--out", str(out)]) == EXIT_OK
    header, _ = read_table(out / "comb.tsv")
    gamma = float(next(h for h in header if "linewidth_rad_s" in h).split(":")[1])
    assert gamma == pytest.approx(2 * np.pi * 3.0e6)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "iafc_memory", "comb", "--config",
                           str(CONFIGS / "rb_comb.yaml"), "--out", str(tmp_path / "m")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "iafc_memory", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "optimize" in proc.stdout
